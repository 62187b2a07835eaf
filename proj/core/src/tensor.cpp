// SPDX-License-Identifier: Apache-2.0

#include "tempose/tensor.hpp"

#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tempose {

namespace {

thread_local Tape* g_current_tape = nullptr;

[[noreturn]] void shape_error(const char* op, const Mat& a, const Mat& b) {
  std::ostringstream os;
  os << op << ": incompatible shapes " << a.rows() << "x" << a.cols()
     << " and " << b.rows() << "x" << b.cols();
  throw std::invalid_argument(os.str());
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    shape_error(op, a.value(), b.value());
}

}  // namespace

// -- Var ----------------------------------------------------------------------

Var Var::leaf(Mat value, bool requires_grad) {
  auto n = std::make_shared<detail::Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  Var v(std::move(n));
  Tape::record(v.node());
  return v;
}

Var Var::scalar(double v, bool requires_grad) {
  Mat m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m), requires_grad);
}

double Var::scalar_value() const {
  if (node_->value.size() != 1)
    throw std::invalid_argument("scalar_value: node is not 1x1");
  return node_->value(0, 0);
}

bool Var::depends_on(const Var& leaf) const {
  std::unordered_set<const detail::Node*> seen;
  std::vector<const detail::Node*> stack{node_.get()};
  while (!stack.empty()) {
    const detail::Node* n = stack.back();
    stack.pop_back();
    if (n == leaf.node_.get()) return true;
    if (!seen.insert(n).second) continue;
    for (const auto& p : n->parents) stack.push_back(p.get());
  }
  return false;
}

// -- Tape -----------------------------------------------------------------------

Tape::Tape() : previous_(g_current_tape) { g_current_tape = this; }

Tape::~Tape() {
  g_current_tape = previous_;
  // Break parent chains iteratively so shared_ptr release never recurses
  // through deep graphs.
  for (auto& n : nodes_) {
    n->parents.clear();
    n->backprop = nullptr;
  }
  nodes_.clear();
}

Tape* Tape::current() { return g_current_tape; }

void Tape::record(const NodePtr& n) {
  if (g_current_tape) g_current_tape->nodes_.push_back(n);
}

void Tape::backward(const Var& root) {
  if (root.size() != 1)
    throw std::invalid_argument(
        "backward: root must be scalar-valued, got " +
        std::to_string(root.rows()) + "x" + std::to_string(root.cols()));
  detail::Node* root_node = root.node().get();
  // Find the root on this tape; nodes created after it cannot influence it.
  std::ptrdiff_t root_pos = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(nodes_.size()) - 1;
       i >= 0; --i) {
    if (nodes_[i].get() == root_node) {
      root_pos = i;
      break;
    }
  }
  if (root_pos < 0)
    throw std::invalid_argument("backward: root was not recorded on this tape");

  root.node()->ensure_grad()(0, 0) += 1.0;
  for (std::ptrdiff_t i = root_pos; i >= 0; --i) {
    detail::Node& n = *nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0 || !n.backprop) continue;
    n.backprop(n);
  }
}

// -- op construction ---------------------------------------------------------

Var make_op(const char* op, Mat value, std::vector<Var> parents,
            std::function<void(detail::Node&)> backprop) {
  auto n = std::make_shared<detail::Node>();
  n->value = std::move(value);
  n->op = op;
  bool needs_grad = false;
  for (const auto& p : parents) needs_grad = needs_grad || p.requires_grad();
  n->requires_grad = needs_grad;
  if (needs_grad) {
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backprop = std::move(backprop);
  }
  Var v(std::move(n));
  Tape::record(v.node());
  return v;
}

namespace {

// Accumulate g into parent i's grad if it participates in differentiation.
inline bool wants_grad(detail::Node& n, std::size_t i) {
  return n.parents[i]->requires_grad;
}

inline Mat& pgrad(detail::Node& n, std::size_t i) {
  return n.parents[i]->ensure_grad();
}

inline const Mat& pval(detail::Node& n, std::size_t i) {
  return n.parents[i]->value;
}

}  // namespace

// -- arithmetic -----------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  return make_op("add", a.value() + b.value(), {a, b}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += n.grad;
    if (wants_grad(n, 1)) pgrad(n, 1) += n.grad;
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  return make_op("sub", a.value() - b.value(), {a, b}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += n.grad;
    if (wants_grad(n, 1)) pgrad(n, 1) -= n.grad;
  });
}

Var neg(const Var& a) {
  return make_op("neg", -a.value(), {a}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) -= n.grad;
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  return make_op("mul", a.value().cwiseProduct(b.value()), {a, b},
                 [](detail::Node& n) {
                   if (wants_grad(n, 0))
                     pgrad(n, 0) += n.grad.cwiseProduct(pval(n, 1));
                   if (wants_grad(n, 1))
                     pgrad(n, 1) += n.grad.cwiseProduct(pval(n, 0));
                 });
}

Var divide(const Var& a, const Var& b) {
  require_same_shape("divide", a, b);
  return make_op("divide", a.value().cwiseQuotient(b.value()), {a, b},
                 [](detail::Node& n) {
                   if (wants_grad(n, 0))
                     pgrad(n, 0) += n.grad.cwiseQuotient(pval(n, 1));
                   if (wants_grad(n, 1))
                     pgrad(n, 1) -= n.grad.cwiseProduct(n.value.cwiseQuotient(pval(n, 1)));
                 });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a.value(), b.value());
  return make_op("matmul", a.value() * b.value(), {a, b}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0).noalias() += n.grad * pval(n, 1).transpose();
    if (wants_grad(n, 1)) pgrad(n, 1).noalias() += pval(n, 0).transpose() * n.grad;
  });
}

Var scale(const Var& a, const Var& s) {
  if (s.size() != 1) throw std::invalid_argument("scale: s must be 1x1");
  return make_op("scale", a.value() * s.scalar_value(), {a, s},
                 [](detail::Node& n) {
                   if (wants_grad(n, 0)) pgrad(n, 0) += n.grad * pval(n, 1)(0, 0);
                   if (wants_grad(n, 1))
                     pgrad(n, 1)(0, 0) += n.grad.cwiseProduct(pval(n, 0)).sum();
                 });
}

Var cmul(const Var& a, double c) {
  return make_op("cmul", a.value() * c, {a}, [c](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += n.grad * c;
  });
}

Var cadd(const Var& a, double c) {
  return make_op("cadd", a.value().array() + c, {a}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += n.grad;
  });
}

// -- activations -------------------------------------------------------------

Var sigmoid(const Var& a) {
  Mat y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return make_op("sigmoid", std::move(y), {a}, [](detail::Node& n) {
    if (!wants_grad(n, 0)) return;
    pgrad(n, 0).array() +=
        n.grad.array() * n.value.array() * (1.0 - n.value.array());
  });
}

Var tanh(const Var& a) {
  Mat y = a.value().array().tanh().matrix();
  return make_op("tanh", std::move(y), {a}, [](detail::Node& n) {
    if (!wants_grad(n, 0)) return;
    pgrad(n, 0).array() += n.grad.array() * (1.0 - n.value.array().square());
  });
}

Var relu(const Var& a) {
  Mat y = a.value().cwiseMax(0.0);
  return make_op("relu", std::move(y), {a}, [](detail::Node& n) {
    if (!wants_grad(n, 0)) return;
    pgrad(n, 0).array() +=
        n.grad.array() * (pval(n, 0).array() > 0.0).cast<double>();
  });
}

Var softmax(const Var& a) {
  Mat y(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    Eigen::ArrayXd e = (a.value().col(j).array() - a.value().col(j).maxCoeff()).exp();
    y.col(j) = (e / e.sum()).matrix();
  }
  return make_op("softmax", std::move(y), {a}, [](detail::Node& n) {
    if (!wants_grad(n, 0)) return;
    Mat& pg = pgrad(n, 0);
    for (Eigen::Index j = 0; j < n.value.cols(); ++j) {
      const auto s = n.value.col(j).array();
      const auto g = n.grad.col(j).array();
      double dot = (s * g).sum();
      pg.col(j).array() += s * (g - dot);
    }
  });
}

// -- shape ops ------------------------------------------------------------------

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty input");
  Eigen::Index cols = parts[0].cols(), rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) shape_error("concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Mat y(rows, cols);
  Eigen::Index r = 0;
  std::vector<Var> ps;
  ps.reserve(parts.size());
  for (const Var& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
    ps.push_back(p);
  }
  return make_op("concat_rows", std::move(y), std::move(ps),
                 [](detail::Node& n) {
                   Eigen::Index r = 0;
                   for (std::size_t i = 0; i < n.parents.size(); ++i) {
                     Eigen::Index nr = n.parents[i]->value.rows();
                     if (wants_grad(n, i))
                       pgrad(n, i) += n.grad.middleRows(r, nr);
                     r += nr;
                   }
                 });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty input");
  Eigen::Index rows = parts[0].rows(), cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts[0].value(), p.value());
    cols += p.cols();
  }
  Mat y(rows, cols);
  Eigen::Index c = 0;
  std::vector<Var> ps;
  ps.reserve(parts.size());
  for (const Var& p : parts) {
    y.middleCols(c, p.cols()) = p.value();
    c += p.cols();
    ps.push_back(p);
  }
  return make_op("concat_cols", std::move(y), std::move(ps),
                 [](detail::Node& n) {
                   Eigen::Index c = 0;
                   for (std::size_t i = 0; i < n.parents.size(); ++i) {
                     Eigen::Index nc = n.parents[i]->value.cols();
                     if (wants_grad(n, i))
                       pgrad(n, i) += n.grad.middleCols(c, nc);
                     c += nc;
                   }
                 });
}

Var block(const Var& a, Eigen::Index r0, Eigen::Index c0, Eigen::Index nr,
          Eigen::Index nc) {
  if (r0 < 0 || c0 < 0 || r0 + nr > a.rows() || c0 + nc > a.cols())
    throw std::invalid_argument("block: range out of bounds");
  return make_op("block", a.value().block(r0, c0, nr, nc), {a},
                 [r0, c0, nr, nc](detail::Node& n) {
                   if (wants_grad(n, 0))
                     pgrad(n, 0).block(r0, c0, nr, nc) += n.grad;
                 });
}

Var slice_rows(const Var& a, Eigen::Index r0, Eigen::Index nr) {
  return block(a, r0, 0, nr, a.cols());
}

Var slice_cols(const Var& a, Eigen::Index c0, Eigen::Index nc) {
  return block(a, 0, c0, a.rows(), nc);
}

Var reshape(const Var& a, Eigen::Index nr, Eigen::Index nc) {
  if (nr * nc != a.size())
    throw std::invalid_argument("reshape: element count mismatch");
  Mat y = Eigen::Map<const Mat>(a.value().data(), nr, nc);
  return make_op("reshape", std::move(y), {a}, [](detail::Node& n) {
    if (!wants_grad(n, 0)) return;
    Mat& pg = pgrad(n, 0);
    pg += Eigen::Map<const Mat>(n.grad.data(), pg.rows(), pg.cols());
  });
}

Var tile_cols(const Var& v, Eigen::Index n) {
  if (v.cols() != 1) throw std::invalid_argument("tile_cols: input must be a column");
  Mat y = v.value().replicate(1, n);
  return make_op("tile_cols", std::move(y), {v}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += n.grad.rowwise().sum();
  });
}

// -- broadcasting ----------------------------------------------------------------

Var add_colwise(const Var& m, const Var& v) {
  if (v.cols() != 1 || v.rows() != m.rows())
    shape_error("add_colwise", m.value(), v.value());
  Mat y = m.value().colwise() + Eigen::VectorXd(v.value().col(0));
  return make_op("add_colwise", std::move(y), {m, v}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += n.grad;
    if (wants_grad(n, 1)) pgrad(n, 1) += n.grad.rowwise().sum();
  });
}

Var sub_colwise(const Var& m, const Var& v) {
  if (v.cols() != 1 || v.rows() != m.rows())
    shape_error("sub_colwise", m.value(), v.value());
  Mat y = m.value().colwise() - Eigen::VectorXd(v.value().col(0));
  return make_op("sub_colwise", std::move(y), {m, v}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += n.grad;
    if (wants_grad(n, 1)) pgrad(n, 1) -= n.grad.rowwise().sum();
  });
}

Var colscale(const Var& m, const Var& r) {
  if (r.rows() != 1 || r.cols() != m.cols())
    shape_error("colscale", m.value(), r.value());
  Mat y = m.value().array().rowwise() * r.value().row(0).array();
  return make_op("colscale", std::move(y), {m, r}, [](detail::Node& n) {
    if (wants_grad(n, 0))
      pgrad(n, 0).array() += n.grad.array().rowwise() * pval(n, 1).row(0).array();
    if (wants_grad(n, 1))
      pgrad(n, 1) += n.grad.cwiseProduct(pval(n, 0)).colwise().sum();
  });
}

// -- reductions ---------------------------------------------------------------

Var sum(const Var& a) {
  Mat y(1, 1);
  y(0, 0) = a.value().sum();
  return make_op("sum", std::move(y), {a}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0).array() += n.grad(0, 0);
  });
}

Var mean(const Var& a) {
  Mat y(1, 1);
  y(0, 0) = a.value().mean();
  return make_op("mean", std::move(y), {a}, [](detail::Node& n) {
    if (wants_grad(n, 0))
      pgrad(n, 0).array() += n.grad(0, 0) / static_cast<double>(pval(n, 0).size());
  });
}

Var squared_norm(const Var& a) {
  Mat y(1, 1);
  y(0, 0) = a.value().squaredNorm();
  return make_op("squared_norm", std::move(y), {a}, [](detail::Node& n) {
    if (wants_grad(n, 0)) pgrad(n, 0) += 2.0 * n.grad(0, 0) * pval(n, 0);
  });
}

}  // namespace tempose
