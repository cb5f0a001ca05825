#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "bfd/error.hpp"
#include "bfd/model_params.hpp"
#include "bfd/spectral.hpp"

namespace bfd {

inline constexpr double kDefaultSpeedKmax = 200.0;
inline constexpr int kDefaultSpeedSamples = 20001;

/// omega_m = (1 - gamma)|c| / b
inline double omega_m(const AbcdSystem& s) {
  if (!(s.b > 0.0)) throw ParameterDomainError("omega_m needs b > 0");
  return (1.0 - s.gamma) * std::abs(s.c) / s.b;
}

struct AnguloSautQuantities {
  double alpha0 = 0.0;
  double beta0 = 0.0;
};

inline AnguloSautQuantities angulo_saut_quantities(const AbcdSystem& s, double c_s) {
  const double g = s.gamma;
  const double beta0 = -4.0 * std::pow(g, 4) * (s.b * std::abs(c_s) + (s.a - 1.0 / (g * g)) / g);
  return {1.0 / g - std::abs(c_s) - 1.0 / beta0, beta0};
}

struct QPolynomial {
  double q0 = 0.0;
  double q1 = 0.0;
  std::optional<double> x_minus;
  std::optional<double> x_plus;

  double operator()(double x) const noexcept { return q0 + q1 * x + x * x; }
};

/// Q(x) = Q0 + Q1 x + x^2 whose positivity at |c_s| is the second speed condition.
inline QPolynomial q_roots(const AbcdSystem& s) {
  const double g = s.gamma;
  const double nu = s.nu_sqrt();
  const double pre = 1.0 / (s.b * g * g);
  QPolynomial q;
  q.q0 = pre * ((nu - g) * (s.a - 1.0 / (g * g)) / g - 1.0 / (4.0 * g * g));
  q.q1 = pre * (s.b * (nu - g) + g * (s.a - 1.0 / (g * g)));
  const double disc = q.q1 * q.q1 - 4.0 * q.q0;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    // Cancellation-free pair: the larger root directly, the smaller one from the product.
    const double big = 0.5 * (-q.q1 + (q.q1 <= 0.0 ? r : -r));
    q.x_plus = big;
    q.x_minus = big != 0.0 ? q.q0 / big : 0.0;
    if (*q.x_minus > *q.x_plus) std::swap(*q.x_minus, *q.x_plus);
  }
  return q;
}

/// C(gamma) = gamma (3 - 4 a gamma^2) / (4 (1 - a gamma^2))
inline double c_gamma_threshold(const AbcdSystem& s) {
  const double g = s.gamma;
  return g * (3.0 - 4.0 * s.a * g * g) / (4.0 * (1.0 - s.a * g * g));
}

/// P(gamma) = gamma^3 - nu gamma^2 + 3 gamma / (4|a|) - nu / |a|, nu = sqrt(mu/mu2).
inline double gamma_cubic(double g, double abs_a, double nu) noexcept {
  return g * g * g - nu * g * g + 3.0 * g / (4.0 * abs_a) - nu / abs_a;
}

/// Unique root in (0,1) of the cubic above, by bisection polished with Newton.
inline double gamma_star(double a, double nu_sqrt) {
  const double abs_a = std::abs(a);
  if (!(a < 0.0)) throw PreconditionError("gamma_star needs a < 0");
  if (!(nu_sqrt >= 0.0) || !(nu_sqrt < (3.0 + abs_a) / (4.0 + abs_a)))
    throw PreconditionError("gamma_star needs sqrt(mu/mu2) < (3+|a|)/(4+|a|)");
  auto p = [&](double g) { return gamma_cubic(g, abs_a, nu_sqrt); };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p(mid) < 0.0 ? lo : hi) = mid;
  }
  double g = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double dp = 3.0 * g * g - 2.0 * nu_sqrt * g + 3.0 / (4.0 * abs_a);
    const double step = p(g) / dp;
    const double next = g - step;
    if (!(next > 0.0 && next < 1.0)) break;
    g = next;
    if (std::abs(step) < 1e-17) break;
  }
  return g;
}

inline double gamma_star(const AbcdSystem& s) { return gamma_star(s.a, s.nu_sqrt()); }

/// R_gamma(x) = (1 - gamma) j_c(x) l(x) / j_b(x)^2
inline double r_gamma(double x, const AbcdSystem& s) {
  const double jb = eval_symbol_jb(x, s);
  return (1.0 - s.gamma) * eval_symbol_jc(x, s) * eval_symbol_l(x, s) / (jb * jb);
}

/// Limit of R_gamma at infinity.
inline double r_gamma_limit(const AbcdSystem& s) {
  const double g = s.gamma;
  return (1.0 - g) / g * std::abs(s.c) / (s.b * s.b) * (std::abs(s.a) + 1.0 / (g * g));
}

struct SpeedLimitReport {
  double omega_m = 0.0;
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double speed = 0.0;  // c_s at which alpha0, beta0 were evaluated
  double q0 = 0.0;
  double q1 = 0.0;
  std::optional<double> x_minus;
  std::optional<double> x_plus;
  double c_gamma_threshold = 0.0;
  std::optional<double> gamma_star;
  double x_gamma = 0.0;
  double m_gamma = 0.0;
  double c_gamma = 0.0;
  double r_limit = 0.0;
  bool minimum_attained = true;
  /// inf over k of phi(k) = sqrt(R_gamma(k)), and the literal sqrt of it.
  double inf_phi = 0.0;
  double sqrt_inf_phi = 0.0;
};

namespace detail {

inline void require_hamiltonian_speed_limit(const AbcdSystem& s) {
  s.validate();
  if (!s.hamiltonian() || !(s.b > 0.0) || !(s.c < 0.0) || !(s.a <= kSignTolerance))
    throw ParameterDomainError("speed limit theory needs b = d > 0, c < 0, a <= 0");
}

}  // namespace detail

/// Fills the Angulo-Saut and Q-polynomial fields of a report at speed c_s.
inline void fill_angulo_saut(SpeedLimitReport& r, const AbcdSystem& s, double c_s) {
  r.omega_m = omega_m(s);
  r.speed = c_s;
  const auto as = angulo_saut_quantities(s, c_s);
  r.alpha0 = as.alpha0;
  r.beta0 = as.beta0;
  const auto q = q_roots(s);
  r.q0 = q.q0;
  r.q1 = q.q1;
  r.x_minus = q.x_minus;
  r.x_plus = q.x_plus;
  r.c_gamma_threshold = c_gamma_threshold(s);
  const double abs_a = std::abs(s.a);
  if (s.a < 0.0 && s.nu_sqrt() < (3.0 + abs_a) / (4.0 + abs_a)) r.gamma_star = gamma_star(s);
}

/// m(gamma) = inf R_gamma and c_gamma = sqrt(m(gamma)), found by dense sampling
/// on [0, k_max] refined with golden-section search and compared with the limit R_m.
inline SpeedLimitReport c_gamma(const AbcdSystem& s, double k_max = kDefaultSpeedKmax,
                                int n_samples = kDefaultSpeedSamples) {
  detail::require_hamiltonian_speed_limit(s);
  if (!(k_max > 0.0)) throw ParameterDomainError("k_max must be positive");
  if (n_samples < 2) throw ParameterDomainError("need at least two samples");

  auto f = [&](double x) { return r_gamma(x, s); };
  const double dx = k_max / (n_samples - 1);
  int best = 0;
  double best_val = f(0.0);
  for (int i = 1; i < n_samples; ++i) {
    const double v = f(i * dx);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }

  double lo = std::max(0.0, (best - 1) * dx);
  double hi = std::min(k_max, (best + 1) * dx);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  double x_star = 0.5 * (lo + hi);
  double m_star = f(x_star);
  for (double cand : {best * dx, 0.0}) {
    const double v = f(cand);
    if (v < m_star) {
      m_star = v;
      x_star = cand;
    }
  }

  SpeedLimitReport r;
  fill_angulo_saut(r, s, 0.0);
  r.r_limit = r_gamma_limit(s);
  r.x_gamma = x_star;
  r.m_gamma = std::min(m_star, r.r_limit);
  r.minimum_attained = m_star <= r.r_limit;
  r.c_gamma = std::sqrt(r.m_gamma);
  r.inf_phi = r.c_gamma;
  r.sqrt_inf_phi = std::sqrt(r.inf_phi);
  return r;
}

struct AnguloSautVerdict {
  bool admissible = false;
  SpeedLimitReport report;
};

/// |c_s| < omega_m and gamma^2 alpha0(c_s) > sqrt(mu/mu2).
inline AnguloSautVerdict angulo_saut_admissible(const AbcdSystem& s, double c_s) {
  s.validate();
  if (!s.hamiltonian() || !(s.b > 0.0) || s.a > kSignTolerance || s.c > kSignTolerance)
    throw ParameterDomainError("Angulo-Saut conditions need b = d > 0 and a, c <= 0");
  AnguloSautVerdict v;
  fill_angulo_saut(v.report, s, c_s);
  v.admissible = std::abs(c_s) < v.report.omega_m &&
                 s.gamma * s.gamma * v.report.alpha0 > s.nu_sqrt();
  return v;
}

struct QOperatorEigen {
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double delta = 0.0;
};

/// Eigenvalues of [[(1-gamma) j_c, -c_s j_b], [-c_s j_b, l]] at wavenumber k.
inline QOperatorEigen q_operator_eigenvalues(const AbcdSystem& s, double c_s, double k) {
  const double p = (1.0 - s.gamma) * eval_symbol_jc(k, s);
  const double l = eval_symbol_l(k, s);
  const double off = c_s * eval_symbol_jb(k, s);
  QOperatorEigen e;
  e.delta = p * l - off * off;
  const double trace = p + l;
  e.lambda_plus = 0.5 * (trace + std::hypot(p - l, 2.0 * off));
  e.lambda_minus = e.lambda_plus != 0.0 ? e.delta / e.lambda_plus : 0.5 * trace;
  return e;
}

struct DispersionSample {
  double k = 0.0;
  double phi = 0.0;
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double v_plus = 0.0;
  double v_minus = 0.0;
  double group_plus = 0.0;
  double group_minus = 0.0;
};

/// phi(k) = sqrt((1-gamma) l j_c / (j_b j_d)); equals sqrt((1-gamma) l j_c) / j_b when b = d.
inline double dispersion_phi(const AbcdSystem& s, double k) {
  const double rad =
      (1.0 - s.gamma) * eval_symbol_l(k, s) * eval_symbol_jc(k, s) /
      (eval_symbol_jb(k, s) * eval_symbol_jd(k, s));
  if (!(rad >= 0.0))
    throw ParameterDomainError("negative radicand in the dispersion relation at k=" +
                               std::to_string(k));
  return std::sqrt(rad);
}

inline DispersionSample dispersion(const AbcdSystem& s, double c_s, double k) {
  DispersionSample d;
  d.k = k;
  d.phi = dispersion_phi(s, k);
  d.omega_plus = -c_s * k + k * d.phi;
  d.omega_minus = -c_s * k - k * d.phi;
  d.v_plus = -c_s + d.phi;
  d.v_minus = -c_s - d.phi;
  const double step = 1e-6 * std::max(1.0, std::abs(k));
  const double dphi = (dispersion_phi(s, k + step) - dispersion_phi(s, k - step)) / (2.0 * step);
  d.group_plus = -c_s + (k * dphi + d.phi);
  d.group_minus = -c_s - (k * dphi + d.phi);
  return d;
}

/// Symbol of the linearized moving-frame operator at a plane wave e^{i(ky - omega t)}.
inline double plane_wave_residual(const AbcdSystem& s, double c_s, double k, double omega) {
  const double w = omega + k * c_s;
  return -eval_symbol_jb(k, s) * eval_symbol_jd(k, s) * w * w +
         (1.0 - s.gamma) * eval_symbol_l(k, s) * k * k * eval_symbol_jc(k, s);
}

}  // namespace bfd
