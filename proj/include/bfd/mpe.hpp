#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "bfd/error.hpp"

namespace bfd {

/// Minimal polynomial extrapolation of a vector sequence x_0, ..., x_{k+1}.
///
/// With u_j = x_{j+1} - x_j the coefficients c_0..c_{k-1} solve the least-squares
/// problem [u_0 .. u_{k-1}] c = -u_k, c_k = 1, and the result is
/// sum_j (c_j / sum c) x_j. Ill-conditioned systems fall back from the normal
/// equations to a minimum-norm solve; a vanishing sum c returns the newest iterate.
template <typename Vector>
Vector mpe_accelerate(const std::vector<Vector>& window) {
  using Scalar = typename Vector::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  if (window.size() < 3) throw ContractError("MPE needs at least three iterates");
  const Eigen::Index k = static_cast<Eigen::Index>(window.size()) - 2;
  const Eigen::Index dim = window.front().size();
  for (const auto& v : window)
    if (v.size() != dim) throw ContractError("MPE iterates must share a dimension");

  Matrix u(dim, k + 1);
  for (Eigen::Index j = 0; j <= k; ++j) u.col(j) = window[j + 1] - window[j];
  const auto& newest = window.back();

  const double scale = u.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return newest;

  const Matrix basis = u.leftCols(k) / scale;
  const Coeffs rhs = -u.col(k) / scale;

  Coeffs c;
  const Matrix gram = basis.adjoint() * basis;
  Eigen::LDLT<Matrix> ldlt(gram);
  const auto diag = ldlt.vectorD().cwiseAbs();
  const bool normal_ok = ldlt.info() == Eigen::Success && diag.minCoeff() > 1e-10 * diag.maxCoeff();
  if (normal_ok) {
    c = ldlt.solve(basis.adjoint() * rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(basis);
    cod.setThreshold(1e-12);
    if (cod.rank() == 0) return newest;
    c = cod.solve(rhs);
  }

  Coeffs full(k + 1);
  full.head(k) = c;
  full(k) = Scalar(1);
  const Scalar total = full.sum();
  if (!(std::abs(total) > 1e-12 * full.cwiseAbs().sum())) return newest;
  if (!full.allFinite()) return newest;
  full /= total;

  Vector out = Vector::Zero(dim);
  for (Eigen::Index j = 0; j <= k; ++j) out += full(j) * window[j];
  return out;
}

}  // namespace bfd
