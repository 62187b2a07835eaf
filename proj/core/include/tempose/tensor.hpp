// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over dense double matrices.
//
// The graph is define-by-run: every op records its inputs and a backprop
// closure on the thread-local Tape that is active at call time. Vectors are
// n x 1 matrices, scalars are 1 x 1. Nodes that reach no gradient-requiring
// leaf are pruned (no parents kept), so constants cost nothing on backward.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tempose {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace detail {

struct Node {
  Mat value;
  Mat grad;  // empty until backward reaches this node
  const char* op = "leaf";
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Accumulates this->grad into the parents' grads.
  std::function<void(Node&)> backprop;

  Mat& ensure_grad() {
    if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
    return grad;
  }
};

}  // namespace detail

using NodePtr = std::shared_ptr<detail::Node>;

// Value handle into the computation graph.
class Var {
 public:
  Var() = default;
  explicit Var(NodePtr n) : node_(std::move(n)) {}

  // Leaf construction. Parameters pass requires_grad = true.
  static Var leaf(Mat value, bool requires_grad = false);
  static Var scalar(double v, bool requires_grad = false);
  static Var constant(const Mat& value) { return leaf(value, false); }

  bool valid() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Mat& mutable_value() { return node_->value; }
  const Mat& grad() const { return node_->grad; }
  Mat& mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.setZero(node_->value.rows(), node_->value.cols()); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Eigen::Index size() const { return node_->value.size(); }
  double scalar_value() const;

  bool requires_grad() const { return node_->requires_grad; }
  const char* op() const { return node_->op; }
  const NodePtr& node() const { return node_; }

  // True if `leaf` is reachable from this node through recorded graph edges.
  bool depends_on(const Var& leaf) const;

 private:
  NodePtr node_;
};

// Records every node created while it is alive; creation order is a valid
// topological order, which backward() walks in reverse. One tape per thread;
// tapes nest (inner tape shadows the outer until destroyed).
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Scalar root only. Populates grads of every reachable gradient-requiring
  // node, including leaves created outside the tape.
  void backward(const Var& root);

  std::size_t node_count() const { return nodes_.size(); }

  static Tape* current();
  static void record(const NodePtr& n);

 private:
  std::vector<NodePtr> nodes_;
  Tape* previous_ = nullptr;
};

// -- op construction -------------------------------------------------------

Var make_op(const char* op, Mat value, std::vector<Var> parents,
            std::function<void(detail::Node&)> backprop);

// -- arithmetic -------------------------------------------------------------

Var add(const Var& a, const Var& b);       // same shape
Var sub(const Var& a, const Var& b);
Var neg(const Var& a);
Var mul(const Var& a, const Var& b);        // elementwise
Var divide(const Var& a, const Var& b);     // elementwise
Var matmul(const Var& a, const Var& b);
Var scale(const Var& a, const Var& s);      // s is 1x1
Var cmul(const Var& a, double c);
Var cadd(const Var& a, double c);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator-(const Var& a) { return neg(a); }
inline Var operator*(const Var& a, const Var& b) { return matmul(a, b); }
inline Var operator*(double c, const Var& a) { return cmul(a, c); }

// -- activations ------------------------------------------------------------

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var softmax(const Var& a);       // per column

// -- shape ops ---------------------------------------------------------------

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var block(const Var& a, Eigen::Index r0, Eigen::Index c0, Eigen::Index nr,
          Eigen::Index nc);
Var slice_rows(const Var& a, Eigen::Index r0, Eigen::Index nr);
Var slice_cols(const Var& a, Eigen::Index c0, Eigen::Index nc);
Var reshape(const Var& a, Eigen::Index nr, Eigen::Index nc);  // column-major
Var tile_cols(const Var& v, Eigen::Index n);                  // v is d x 1

// -- broadcasting -------------------------------------------------------------

Var add_colwise(const Var& m, const Var& v);  // v (rows x 1) added to each column
Var sub_colwise(const Var& m, const Var& v);
Var colscale(const Var& m, const Var& r);     // r (1 x cols) scales each column

// -- reductions ----------------------------------------------------------------

Var sum(const Var& a);
Var mean(const Var& a);
Var squared_norm(const Var& a);

}  // namespace tempose
