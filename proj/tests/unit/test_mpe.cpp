#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <complex>
#include <random>

#include "bfd/mpe.hpp"

using namespace bfd;

namespace {

// x_{j+1} = A x_j + b with a contraction A whose fixed point is known.
std::vector<Eigen::VectorXd> linear_sequence(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                             Eigen::VectorXd x, int count) {
  std::vector<Eigen::VectorXd> out{x};
  for (int i = 1; i < count; ++i) {
    x = a * x + b;
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(Mpe, ScalarGeometricSequence) {
  // x_j = 1 + 0.5^j: the limit 1 is recovered from three iterates.
  std::vector<Eigen::VectorXd> w;
  for (int j = 0; j < 3; ++j) w.push_back(Eigen::VectorXd::Constant(1, 1.0 + std::pow(0.5, j)));
  EXPECT_NEAR(mpe_accelerate(w)(0), 1.0, 1e-14);
}

TEST(Mpe, ParallelDifferencesStillExtrapolate) {
  // Every difference is a multiple of one direction, so the least-squares
  // system is rank one.
  const Eigen::Vector3d dir(1.0, -2.0, 0.5), limit(0.3, 0.1, -0.7);
  std::vector<Eigen::VectorXd> w;
  for (int j = 0; j < 7; ++j) w.push_back(limit + std::pow(0.7, j) * dir);
  EXPECT_LT((mpe_accelerate(w) - limit).norm(), 1e-12);
}

TEST(Mpe, ExactForLinearIterationOfMatchingDegree) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  const int dim = 4;
  Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(dim, dim, [&] { return nd(rng); });
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  const Eigen::MatrixXd orth = qr.householderQ();
  Eigen::VectorXd eig(dim);
  eig << 0.9, -0.5, 0.3, 0.1;
  const Eigen::MatrixXd a = orth * eig.asDiagonal() * orth.transpose();
  const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(dim, [&] { return nd(rng); });
  const Eigen::VectorXd fixed = (Eigen::MatrixXd::Identity(dim, dim) - a).partialPivLu().solve(b);
  const auto seq = linear_sequence(a, b, Eigen::VectorXd::Zero(dim), dim + 2);
  EXPECT_LT((mpe_accelerate(seq) - fixed).norm(), 1e-10);
  EXPECT_GT((seq.back() - fixed).norm(), 1e-2);
}

TEST(Mpe, IdenticalIteratesReturnThatIterate) {
  const Eigen::Vector2d v(3.0, -1.0);
  const std::vector<Eigen::VectorXd> w(6, v);
  const auto r = mpe_accelerate(w);
  EXPECT_TRUE(r.allFinite());
  EXPECT_LT((r - v).norm(), 1e-15);
}

TEST(Mpe, ComplexVectors) {
  using V = Eigen::VectorXcd;
  const std::complex<double> ratio(0.4, 0.3);
  V limit(2), dir(2);
  limit << std::complex<double>(1.0, 2.0), std::complex<double>(-0.5, 0.25);
  dir << std::complex<double>(0.2, -1.0), std::complex<double>(1.5, 0.0);
  std::vector<V> w;
  for (int j = 0; j < 4; ++j) w.push_back(limit + std::pow(ratio, j) * dir);
  EXPECT_LT((mpe_accelerate(w) - limit).norm(), 1e-12);
}

TEST(Mpe, Contracts) {
  std::vector<Eigen::VectorXd> two(2, Eigen::VectorXd::Zero(2));
  EXPECT_THROW(mpe_accelerate(two), ContractError);
  std::vector<Eigen::VectorXd> ragged{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3),
                                      Eigen::VectorXd::Zero(2)};
  EXPECT_THROW(mpe_accelerate(ragged), ContractError);
}
