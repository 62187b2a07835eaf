// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tempose/gru.hpp"

#include <random>
#include <vector>

using namespace tempose;

namespace {

// Independent scalar-loop reimplementation of the gate equations. Kept free
// of Eigen expression shortcuts on purpose: same math, different code path.
Mat naive_step(const GruCell& cell, const Mat& x, const Mat& h) {
  const Mat& wr = cell.w_reset.value();
  const Mat& ur = cell.u_reset.value();
  const Mat& br = cell.b_reset.value();
  const Mat& wz = cell.w_update.value();
  const Mat& uz = cell.u_update.value();
  const Mat& bz = cell.b_update.value();
  const Mat& wn = cell.w_cand.value();
  const Mat& un = cell.u_cand.value();
  const Mat& bn = cell.b_cand.value();
  const Eigen::Index H = h.rows(), B = x.cols();
  Mat out(H, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    for (Eigen::Index i = 0; i < H; ++i) {
      double rs = br(i, 0), zs = bz(i, 0), cs = bn(i, 0), ch = 0;
      for (Eigen::Index k = 0; k < x.rows(); ++k) {
        rs += wr(i, k) * x(k, b);
        zs += wz(i, k) * x(k, b);
        cs += wn(i, k) * x(k, b);
      }
      for (Eigen::Index k = 0; k < H; ++k) {
        rs += ur(i, k) * h(k, b);
        zs += uz(i, k) * h(k, b);
        ch += un(i, k) * h(k, b);
      }
      const double r = 1.0 / (1.0 + std::exp(-rs));
      const double z = 1.0 / (1.0 + std::exp(-zs));
      const double n = std::tanh(cs + r * ch);
      out(i, b) = (1.0 - z) * n + z * h(i, b);
    }
  }
  return out;
}

Mat random_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}

}  // namespace

TEST_CASE("rollout matches the naive step oracle on 100 random cells") {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<int> dim(1, 7), len(1, 9), batch(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const int in = dim(rng), hid = dim(rng), T = len(rng), B = batch(rng);
    GruCell cell = GruCell::create(in, hid, rng);
    std::vector<Var> xs;
    Tape tape;
    for (int t = 0; t < T; ++t) xs.push_back(Var::leaf(random_mat(rng, in, B)));
    Mat expect = Mat::Zero(hid, B);
    for (int t = 0; t < T; ++t) expect = naive_step(cell, xs[t].value(), expect);
    Mat got = cell.rollout(xs, B).value();
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("single step matches the oracle too") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    GruCell cell = GruCell::create(5, 4, rng);
    Tape tape;
    Var x = Var::leaf(random_mat(rng, 5, 2));
    Var h = Var::leaf(random_mat(rng, 4, 2));
    CHECK((cell.step(x, h).value() - naive_step(cell, x.value(), h.value()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("all-zero weights halve the hidden state") {
  std::mt19937_64 rng(102);
  GruCell cell = GruCell::create(3, 4, rng);
  for (Var* w : {&cell.w_reset, &cell.u_reset, &cell.w_update, &cell.u_update,
                 &cell.w_cand, &cell.u_cand})
    w->mutable_value().setZero();
  Tape tape;
  Mat h0 = random_mat(rng, 4, 2);
  Var out = cell.step(Var::leaf(random_mat(rng, 3, 2)), Var::leaf(h0));
  // r = z = 1/2 and n = 0, so h' = z h = h / 2 exactly
  CHECK((out.value() - 0.5 * h0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empty rollout returns the zero state") {
  std::mt19937_64 rng(103);
  GruCell cell = GruCell::create(3, 4, rng);
  Tape tape;
  std::vector<Var> xs;
  Mat out = cell.rollout(xs, 2).value();
  CHECK(out.rows() == 4);
  CHECK(out.cols() == 2);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batch columns evolve independently") {
  std::mt19937_64 rng(104);
  GruCell cell = GruCell::create(3, 5, rng);
  Tape tape;
  std::vector<Var> both, first;
  for (int t = 0; t < 6; ++t) {
    Mat x = random_mat(rng, 3, 2);
    both.push_back(Var::leaf(x));
    first.push_back(Var::leaf(Mat(x.col(0))));
  }
  Mat b = cell.rollout(both, 2).value();
  Mat f = cell.rollout(first, 1).value();
  CHECK((b.col(0) - f.col(0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("creation is deterministic in the generator state") {
  std::mt19937_64 a(7), b(7);
  GruCell ca = GruCell::create(4, 6, a);
  GruCell cb = GruCell::create(4, 6, b);
  CHECK(ca.w_cand.value() == cb.w_cand.value());
  CHECK(ca.u_reset.value() == cb.u_reset.value());
  std::vector<Var> pa;
  ca.collect_params(pa);
  CHECK(pa.size() == 9);
  for (const Var& p : pa) CHECK(p.requires_grad());
}

TEST_CASE("mismatched shapes are rejected") {
  std::mt19937_64 rng(105);
  GruCell cell = GruCell::create(3, 4, rng);
  Tape tape;
  Var bad_x = Var::leaf(Mat::Zero(2, 1));
  Var h = Var::leaf(Mat::Zero(4, 1));
  CHECK_THROWS(cell.step(bad_x, h));
  Var x = Var::leaf(Mat::Zero(3, 1));
  Var bad_h = Var::leaf(Mat::Zero(5, 1));
  CHECK_THROWS(cell.step(x, bad_h));
}
