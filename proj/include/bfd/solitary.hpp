#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bfd/error.hpp"
#include "bfd/model_params.hpp"
#include "bfd/mpe.hpp"
#include "bfd/spectral.hpp"

namespace bfd {

struct ProfileSolveConfig {
  double c_s = 0.05;
  double tolerance = 1e-12;
  int max_iterations = 500;
  int mpe_width = 6;
  bool accelerate = true;
  double guess_amplitude = 1.0;
  double guess_width = 0.3;
  /// Centre of the sech^2 guess; defaults to the grid's reflection centre.
  std::optional<double> guess_center;
  bool recenter = true;

  void validate() const {
    if (!(tolerance > 0.0)) throw ParameterDomainError("tolerance must be positive");
    if (mpe_width < 2) throw ParameterDomainError("mpe_width must be at least 2");
    if (max_iterations < 1) throw ParameterDomainError("max_iterations must be positive");
    if (!(guess_width > 0.0)) throw ParameterDomainError("guess_width must be positive");
    if (guess_amplitude == 0.0) throw ParameterDomainError("guess_amplitude must be nonzero");
  }
};

struct SolitaryWave {
  std::vector<double> zeta;
  std::vector<double> u;
  double c_s = 0.0;
  std::vector<double> residual_history;
  int iterations = 0;
  double amplitude_zeta = 0.0;
  double amplitude_u = 0.0;
  /// Peak location before recentring, and where the peak sits afterwards.
  double raw_peak_position = 0.0;
  double peak_position = 0.0;
  double stabilizing_factor = 0.0;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
  WaveState state() const { return WaveState(zeta, u); }
};

/// S_k = [[-c_s j_b, l], [(1-gamma) j_c, -c_s j_d]] at grid mode index k_index.
inline Eigen::Matrix2d mode_matrix(std::size_t k_index, const SymbolSet& sym, const AbcdSystem& sys,
                                   double c_s) {
  Eigen::Matrix2d m;
  m << -c_s * sym.jb[k_index], sym.l[k_index], (1.0 - sys.gamma) * sym.jc[k_index],
      -c_s * sym.jd[k_index];
  return m;
}

/// Same, raising SingularModeError when |det| < 1e-14 (1 + |S|_F^2).
inline Eigen::Matrix2d checked_mode_matrix(std::size_t k_index, const PeriodicGrid& grid,
                                           const SymbolSet& sym, const AbcdSystem& sys,
                                           double c_s) {
  const auto m = mode_matrix(k_index, sym, sys, c_s);
  const double det = m.determinant();
  if (std::abs(det) < 1e-14 * (1.0 + m.squaredNorm()))
    throw SingularModeError(grid.signed_mode(k_index), det);
  return m;
}

/// Per-mode matrices and inverses for one speed, over the stored half spectrum.
class ProfileOperator {
 public:
  ProfileOperator(const Discretization& disc, double c_s) : c_s_(c_s) {
    const std::size_t nh = disc.half_size();
    s_.resize(nh);
    inv_.resize(nh);
    for (std::size_t k = 0; k < nh; ++k) {
      s_[k] = checked_mode_matrix(k, disc.grid(), disc.symbols(), disc.system(), c_s);
      inv_[k] = s_[k].inverse();
    }
  }

  double speed() const noexcept { return c_s_; }
  const Eigen::Matrix2d& matrix(std::size_t k) const { return s_[k]; }
  const Eigen::Matrix2d& inverse(std::size_t k) const { return inv_[k]; }

  SpectralPair apply(const SpectralPair& z) const {
    SpectralPair out{std::vector<Complex>(z.zeta.size()), std::vector<Complex>(z.u.size())};
    for (std::size_t k = 0; k < z.zeta.size(); ++k) {
      out.zeta[k] = s_[k](0, 0) * z.zeta[k] + s_[k](0, 1) * z.u[k];
      out.u[k] = s_[k](1, 0) * z.zeta[k] + s_[k](1, 1) * z.u[k];
    }
    return out;
  }

  SpectralPair solve(const SpectralPair& r) const {
    SpectralPair out{std::vector<Complex>(r.zeta.size()), std::vector<Complex>(r.u.size())};
    for (std::size_t k = 0; k < r.zeta.size(); ++k) {
      out.zeta[k] = inv_[k](0, 0) * r.zeta[k] + inv_[k](0, 1) * r.u[k];
      out.u[k] = inv_[k](1, 0) * r.zeta[k] + inv_[k](1, 1) * r.u[k];
    }
    return out;
  }

 private:
  double c_s_;
  std::vector<Eigen::Matrix2d> s_;
  std::vector<Eigen::Matrix2d> inv_;
};

/// (epsilon/gamma) (F(zeta u), F(u^2)/2) as half spectra.
inline SpectralPair nonlinear_image(const WaveState& z, const Discretization& disc) {
  const double coef = disc.system().epsilon / disc.system().gamma;
  SpectralPair out{std::vector<Complex>(disc.half_size()), std::vector<Complex>(disc.half_size())};
  disc.product_spectrum(z.zeta, z.u, out.zeta);
  disc.product_spectrum(z.u, z.u, out.u);
  for (auto& v : out.zeta) v *= coef;
  for (auto& v : out.u) v *= 0.5 * coef;
  return out;
}

inline double pair_inner(const SpectralPair& a, const SpectralPair& b) {
  return half_inner(a.zeta, b.zeta) + half_inner(a.u, b.u);
}

/// sqrt(sum over all modes of |R_zeta|^2 + |R_u|^2) for R = S z - N(z), i.e. the
/// Euclidean norm of the nodal residual divided by sqrt(N).
inline double profile_residual(const SpectralPair& sz, const SpectralPair& nz) {
  double acc = 0.0;
  for (std::size_t k = 0; k < sz.zeta.size(); ++k) {
    const double w = mode_weight(k, sz.zeta.size());
    acc += w * (std::norm(sz.zeta[k] - nz.zeta[k]) + std::norm(sz.u[k] - nz.u[k]));
  }
  return std::sqrt(acc);
}

struct PetviashviliStep {
  WaveState next;
  double stabilizing_factor = 0.0;
  /// Residual of the input iterate.
  double residual = 0.0;
};

inline PetviashviliStep petviashvili_step(const WaveState& z, const Discretization& disc,
                                          const ProfileOperator& op) {
  const auto zs = disc.forward(z);
  const auto sz = op.apply(zs);
  const auto nz = nonlinear_image(z, disc);
  const double num = pair_inner(zs, sz);
  const double den = pair_inner(zs, nz);
  if (!(std::abs(den) >= 1e-300))
    throw DegenerateIterateError("stabilizing factor is 0/0: <N(z), z> vanishes");
  PetviashviliStep out;
  out.stabilizing_factor = num / den;
  out.residual = profile_residual(sz, nz);
  const double m2 = out.stabilizing_factor * out.stabilizing_factor;
  SpectralPair rhs = nz;
  for (auto& v : rhs.zeta) v *= m2;
  for (auto& v : rhs.u) v *= m2;
  out.next = disc.inverse(op.solve(rhs));
  return out;
}

inline PetviashviliStep petviashvili_step(const WaveState& z, const Discretization& disc,
                                          double c_s) {
  return petviashvili_step(z, disc, ProfileOperator(disc, c_s));
}

/// Residual of (zeta, u) in the collocation profile system at speed c_s.
inline double collocation_residual(const WaveState& z, const Discretization& disc, double c_s) {
  const ProfileOperator op(disc, c_s);
  return profile_residual(op.apply(disc.forward(z)), nonlinear_image(z, disc));
}

/// Sub-grid location of the largest |f| through spectral refinement.
inline double locate_peak(std::span<const double> f, const PeriodicGrid& grid,
                          FourierTransform& fft) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < f.size(); ++j)
    if (std::abs(f[j]) > std::abs(f[best])) best = j;
  const std::size_t n = f.size();
  const auto q = quadratic_peak(f[(best + n - 1) % n], f[best], f[(best + 1) % n], grid.spacing());
  const auto half = fft.forward_half(f);
  return refine_extremum(half, grid.node(best) + q.offset, grid);
}

namespace detail {

inline Eigen::VectorXd stack(const WaveState& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd v(2 * n);
  v.head(n) = Eigen::Map<const Eigen::VectorXd>(s.zeta.data(), n);
  v.tail(n) = Eigen::Map<const Eigen::VectorXd>(s.u.data(), n);
  return v;
}

inline WaveState unstack(const Eigen::VectorXd& v) {
  const auto n = v.size() / 2;
  return WaveState(std::vector<double>(v.data(), v.data() + n),
                   std::vector<double>(v.data() + n, v.data() + 2 * n));
}

}  // namespace detail

inline WaveState sech2_guess(const PeriodicGrid& grid, const ProfileSolveConfig& cfg) {
  const double center = cfg.guess_center.value_or(grid.reflection_center());
  const double u_sign = cfg.c_s < 0.0 ? -1.0 : 1.0;
  WaveState s(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double y = grid.wrap(grid.node(j) - center);
    const double ch = std::cosh(cfg.guess_width * y);
    s.zeta[j] = cfg.guess_amplitude / (ch * ch);
    s.u[j] = u_sign * s.zeta[j];
  }
  return s;
}

/// Petviashvili iteration from a sech^2 guess, accelerated by cycles of minimal
/// polynomial extrapolation, followed by recentring of the peak onto the grid's
/// reflection centre -h/2.
inline SolitaryWave solve_profile(const ProfileSolveConfig& cfg, const Discretization& disc) {
  cfg.validate();
  const ProfileOperator op(disc, cfg.c_s);
  WaveState current = sech2_guess(disc.grid(), cfg);

  SolitaryWave out;
  out.c_s = cfg.c_s;
  std::vector<Eigen::VectorXd> window;
  if (cfg.accelerate) window.push_back(detail::stack(current));

  bool converged = false;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    auto step = petviashvili_step(current, disc, op);
    out.residual_history.push_back(step.residual);
    out.stabilizing_factor = step.stabilizing_factor;
    if (!std::isfinite(step.residual)) break;
    if (step.residual <= cfg.tolerance) {
      out.iterations = it;
      converged = true;
      break;
    }
    current = std::move(step.next);
    if (cfg.accelerate) {
      window.push_back(detail::stack(current));
      if (window.size() == static_cast<std::size_t>(cfg.mpe_width) + 2) {
        const auto v = mpe_accelerate(window);
        current = detail::unstack(v);
        window.assign(1, v);
      }
    }
  }
  if (!converged)
    throw ConvergenceError("Petviashvili iteration did not reach tolerance " +
                               std::to_string(cfg.tolerance) + " in " +
                               std::to_string(cfg.max_iterations) + " iterations",
                           out.residual_history);

  auto& fft = disc.transform();
  const auto& grid = disc.grid();
  out.raw_peak_position = locate_peak(current.zeta, grid, fft);
  if (cfg.recenter) {
    const double shift = grid.wrap(grid.reflection_center() - out.raw_peak_position);
    current.zeta = spectral_shift(current.zeta, shift, grid, fft);
    current.u = spectral_shift(current.u, shift, grid, fft);
    out.peak_position = grid.reflection_center();
  } else {
    out.peak_position = out.raw_peak_position;
  }
  out.amplitude_zeta =
      eval_interpolant(fft.forward_half(current.zeta), out.peak_position, grid).value;
  out.amplitude_u = eval_interpolant(fft.forward_half(current.u), out.peak_position, grid).value;
  out.zeta = std::move(current.zeta);
  out.u = std::move(current.u);
  return out;
}

}  // namespace bfd
