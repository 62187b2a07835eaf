// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tempose/gradcheck.hpp"
#include "tempose/tensor.hpp"

#include <cmath>
#include <random>

using namespace tempose;

namespace {

Mat random_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}

}  // namespace

TEST_CASE("elementwise and matrix arithmetic match Eigen") {
  std::mt19937_64 rng(1);
  Mat a = random_mat(rng, 3, 4), b = random_mat(rng, 3, 4);
  Mat m = random_mat(rng, 4, 2);
  Tape tape;
  Var va = Var::leaf(a), vb = Var::leaf(b), vm = Var::leaf(m);
  CHECK((va + vb).value().isApprox(a + b));
  CHECK((va - vb).value().isApprox(a - b));
  CHECK((-va).value().isApprox(-a));
  CHECK(mul(va, vb).value().isApprox(a.cwiseProduct(b)));
  CHECK(divide(va, vb).value().isApprox(a.cwiseQuotient(b)));
  CHECK((va * vm).value().isApprox(a * m));
  CHECK((2.5 * va).value().isApprox(2.5 * a));
  CHECK(cmul(va, -3.0).value().isApprox(-3.0 * a));
  CHECK(cadd(va, 0.5).value().isApprox((a.array() + 0.5).matrix()));
  Var s = Var::leaf(Mat::Constant(1, 1, 2.0));
  CHECK(scale(va, s).value().isApprox(2.0 * a));
}

TEST_CASE("activations") {
  Tape tape;
  Mat x(2, 2);
  x << -1.0, 0.0, 0.5, 2.0;
  Var v = Var::leaf(x);
  CHECK(sigmoid(v).value()(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
  CHECK(sigmoid(v).value()(0, 1) == doctest::Approx(0.5));
  CHECK(tanh(v).value()(1, 1) == doctest::Approx(std::tanh(2.0)));
  CHECK(relu(v).value()(0, 0) == 0.0);
  CHECK(relu(v).value()(1, 0) == 0.5);
}

TEST_CASE("softmax normalizes each column and ignores column shifts") {
  std::mt19937_64 rng(2);
  Tape tape;
  Mat x = random_mat(rng, 5, 3);
  Var sm = softmax(Var::leaf(x));
  for (int c = 0; c < 3; ++c) {
    CHECK(sm.value().col(c).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sm.value().col(c).minCoeff() > 0.0);
  }
  Mat shifted = x;
  shifted.array() += 123.0;  // per-column shift invariance, also overflow guard
  CHECK(softmax(Var::leaf(shifted)).value().isApprox(sm.value(), 1e-12));
}

TEST_CASE("structural ops rearrange values exactly") {
  std::mt19937_64 rng(3);
  Tape tape;
  Mat a = random_mat(rng, 2, 3), b = random_mat(rng, 4, 3);
  std::vector<Var> rows{Var::leaf(a), Var::leaf(b)};
  Var cat = concat_rows(rows);
  CHECK(cat.rows() == 6);
  CHECK(cat.value().topRows(2).isApprox(a));
  CHECK(cat.value().bottomRows(4).isApprox(b));

  std::vector<Var> cols{Var::leaf(a), Var::leaf(a)};
  CHECK(concat_cols(cols).value().rightCols(3).isApprox(a));

  CHECK(block(Var::leaf(b), 1, 1, 2, 2).value().isApprox(b.block(1, 1, 2, 2)));
  CHECK(slice_rows(Var::leaf(b), 1, 2).value().isApprox(b.middleRows(1, 2)));
  CHECK(slice_cols(Var::leaf(b), 2, 1).value().isApprox(b.middleCols(2, 1)));
  CHECK(reshape(Var::leaf(b), 2, 6).value().reshaped(4, 3).isApprox(b));
  Mat col = random_mat(rng, 4, 1);
  CHECK(tile_cols(Var::leaf(col), 3).value().col(2).isApprox(col));
}

TEST_CASE("column broadcasts") {
  std::mt19937_64 rng(4);
  Tape tape;
  Mat x = random_mat(rng, 3, 4), c = random_mat(rng, 3, 1), w = random_mat(rng, 1, 4);
  CHECK(add_colwise(Var::leaf(x), Var::leaf(c)).value().isApprox(x.colwise() + c.col(0)));
  CHECK(sub_colwise(Var::leaf(x), Var::leaf(c)).value().isApprox(x.colwise() - c.col(0)));
  Mat scaled = x;
  for (int j = 0; j < 4; ++j) scaled.col(j) *= w(0, j);
  CHECK(colscale(Var::leaf(x), Var::leaf(w)).value().isApprox(scaled));
}

TEST_CASE("reductions") {
  std::mt19937_64 rng(5);
  Tape tape;
  Mat x = random_mat(rng, 3, 4);
  CHECK(sum(Var::leaf(x)).scalar_value() == doctest::Approx(x.sum()));
  CHECK(mean(Var::leaf(x)).scalar_value() == doctest::Approx(x.mean()));
  CHECK(squared_norm(Var::leaf(x)).scalar_value() ==
        doctest::Approx(x.squaredNorm()));
}

TEST_CASE("gradients accumulate when a node is reused") {
  Tape tape;
  Mat x0(2, 2);
  x0 << 1.0, -2.0, 3.0, 0.5;
  Var x = Var::leaf(x0, true);
  Var y = sum(mul(x, x));  // d/dx sum(x*x) = 2x
  tape.backward(y);
  CHECK(x.grad().isApprox(2.0 * x0, 1e-12));
}

TEST_CASE("constant subgraphs carry no gradient state") {
  Tape tape;
  Var a = Var::leaf(Mat::Constant(2, 2, 1.5));  // requires_grad = false
  Var b = Var::leaf(Mat::Constant(2, 2, -0.5));
  Var c = mul(a, b);
  CHECK_FALSE(c.requires_grad());
  Var t = Var::leaf(Mat::Constant(2, 2, 2.0), true);
  Var y = sum(mul(c, t));
  tape.backward(y);
  CHECK(t.grad().isApprox(c.value(), 1e-12));
  CHECK(a.grad().size() == 0);
}

TEST_CASE("deep graphs build and tear down without recursion limits") {
  Tape tape;
  Var x = Var::leaf(Mat::Constant(1, 1, 1.0), true);
  Var y = x;
  for (int i = 0; i < 200000; ++i) y = cmul(y, 1.0000001);
  Var loss = sum(y);
  tape.backward(loss);
  CHECK(std::isfinite(x.grad()(0, 0)));
  CHECK(x.grad()(0, 0) > 1.0);
}

TEST_CASE("backward on a second tape leaves earlier results intact") {
  Mat x0 = Mat::Constant(1, 1, 3.0);
  Var x = Var::leaf(x0, true);
  {
    Tape t1;
    Var y = squared_norm(x);
    t1.backward(y);
  }
  CHECK(x.grad()(0, 0) == doctest::Approx(6.0));
  x.zero_grad();
  {
    Tape t2;
    Var y = sum(x);
    t2.backward(y);
  }
  CHECK(x.grad()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("finite-difference suite covers every op end to end") {
  SuiteReport rep = run_gradient_suite(99, 4, 1e-4);
  INFO(rep.summary());
  CHECK(rep.all_pass);
}
