#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bfd/error.hpp"
#include "bfd/model_params.hpp"
#include "bfd/spectral.hpp"

namespace bfd {

struct EvolveConfig {
  double dt = 6.25e-3;
  double t_final = 1.0;
  double courant_ratio = 1.0;
  bool enforce_courant = true;
  double stage_tolerance = 1e-13;
  int stage_max_iters = 100;
  int record_every = 1;
  /// Keep spectral snapshots of every recorded state in the result.
  bool keep_snapshots = false;

  void validate(const PeriodicGrid& grid) const {
    if (!(dt > 0.0)) throw ParameterDomainError("dt must be positive");
    if (!(t_final >= 0.0)) throw ParameterDomainError("t_final must be non-negative");
    if (record_every < 1) throw ParameterDomainError("record_every must be positive");
    if (!(stage_tolerance > 0.0) || stage_max_iters < 1)
      throw ParameterDomainError("stage tolerance and iteration cap must be positive");
    if (enforce_courant && dt > courant_ratio * grid.spacing() * (1.0 + 1e-12))
      throw ParameterDomainError("dt=" + std::to_string(dt) + " exceeds the Courant bound " +
                                 std::to_string(courant_ratio * grid.spacing()));
  }

  long steps() const {
    const double n = t_final / dt;
    const long r = std::lround(n);
    if (std::abs(n - static_cast<double>(r)) > 1e-9 * std::max(1.0, n))
      throw ParameterDomainError("t_final must be an integer multiple of dt");
    return r;
  }
};

/// Composition weights b1 = b3 = 1/(2 - 2^(1/3)), b2 = 1 - 2 b1.
struct CompositionWeights {
  static double b1() { return 1.0 / (2.0 - std::cbrt(2.0)); }
  static double b2() { return 1.0 - 2.0 * b1(); }
  static double b3() { return b1(); }
};

struct InvariantSeries {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> momentum;

  std::size_t size() const noexcept { return times.size(); }
};

/// Semidiscrete Fourier collocation system advanced in spectral variables.
///
///   dZ/dt = -(i k / j_b) (l U - (eps/gamma) (zeta u)^)
///   dU/dt = -(i k / j_d) ((1 - gamma) j_c Z - (eps / 2 gamma) (u^2)^)
class SpectralFlow {
 public:
  explicit SpectralFlow(const Discretization& disc)
      : disc_(disc), zeta_(disc.size()), u_(disc.size()) {
    const std::size_t nh = disc.half_size();
    const auto& sym = disc.symbols();
    const auto& sys = disc.system();
    a_.resize(nh);
    b_.resize(nh);
    na_.resize(nh);
    nb_.resize(nh);
    for (std::size_t k = 0; k < nh; ++k) {
      const double kt = disc.deriv_half(k);
      a_[k] = kt * sym.l[k] / sym.jb[k];
      b_[k] = kt * (1.0 - sys.gamma) * sym.jc[k] / sym.jd[k];
      na_[k] = kt * (sys.epsilon / sys.gamma) / sym.jb[k];
      nb_[k] = kt * (sys.epsilon / (2.0 * sys.gamma)) / sym.jd[k];
    }
  }

  const Discretization& discretization() const noexcept { return disc_; }

  /// Nonlinear contribution i k (eps/gamma)(zeta u)^ / j_b and i k (eps/2gamma)(u^2)^ / j_d.
  void nonlinear(const SpectralPair& y, SpectralPair& out) const {
    auto& fft = disc_.transform();
    fft.inverse(y.zeta, zeta_);
    fft.inverse(y.u, u_);
    out.zeta.resize(y.zeta.size());
    out.u.resize(y.u.size());
    disc_.product_spectrum(zeta_, u_, out.zeta);
    disc_.product_spectrum(u_, u_, out.u);
    for (std::size_t k = 0; k < out.zeta.size(); ++k) {
      out.zeta[k] *= Complex(0.0, na_[k]);
      out.u[k] *= Complex(0.0, nb_[k]);
    }
  }

  SpectralPair rhs(const SpectralPair& y) const {
    SpectralPair out;
    nonlinear(y, out);
    for (std::size_t k = 0; k < out.zeta.size(); ++k) {
      out.zeta[k] += Complex(0.0, -a_[k]) * y.u[k];
      out.u[k] += Complex(0.0, -b_[k]) * y.zeta[k];
    }
    return out;
  }

  /// One implicit midpoint step of size h. The stage y* = y + (h/2) f(y*) is found
  /// by fixed-point iteration on the nonlinearity with the linear part inverted
  /// exactly mode by mode; the step returns 2 y* - y.
  SpectralPair midpoint(const SpectralPair& y, double h, double tol, int max_iters,
                        int* iterations_out = nullptr) const {
    const double h2 = 0.5 * h;
    const std::size_t nh = y.zeta.size();
    const double n = static_cast<double>(disc_.size());
    const bool linear = disc_.system().epsilon == 0.0;

    SpectralPair stage = y;
    SpectralPair nl;
    double last = 0.0;
    int it = 0;
    for (it = 1; it <= max_iters; ++it) {
      if (!linear) nonlinear(stage, nl);
      double diff2 = 0.0;
      for (std::size_t k = 0; k < nh; ++k) {
        Complex rz = y.zeta[k];
        Complex ru = y.u[k];
        if (!linear) {
          rz += h2 * nl.zeta[k];
          ru += h2 * nl.u[k];
        }
        // [[1, i h2 A], [i h2 B, 1]] x = r
        const double det = 1.0 + h2 * h2 * a_[k] * b_[k];
        const Complex z = (rz - Complex(0.0, h2 * a_[k]) * ru) / det;
        const Complex u = (ru - Complex(0.0, h2 * b_[k]) * rz) / det;
        const double w = mode_weight(k, nh);
        diff2 += w * (std::norm(z - stage.zeta[k]) + std::norm(u - stage.u[k]));
        stage.zeta[k] = z;
        stage.u[k] = u;
      }
      last = std::sqrt(n * diff2);
      if (linear || last <= tol) break;
      if (!std::isfinite(last)) break;
    }
    if (iterations_out != nullptr) *iterations_out = it;
    if (!(linear || last <= tol))
      throw StepFailure("implicit midpoint stage did not converge (update " +
                            std::to_string(last) + " after " + std::to_string(max_iters) +
                            " iterations)",
                        max_iters, last);
    SpectralPair out = stage;
    for (std::size_t k = 0; k < nh; ++k) {
      out.zeta[k] = 2.0 * stage.zeta[k] - y.zeta[k];
      out.u[k] = 2.0 * stage.u[k] - y.u[k];
    }
    return out;
  }

  SpectralPair compose(const SpectralPair& y, double dt, double tol, int max_iters) const {
    auto s = midpoint(y, CompositionWeights::b1() * dt, tol, max_iters);
    s = midpoint(s, CompositionWeights::b2() * dt, tol, max_iters);
    return midpoint(s, CompositionWeights::b3() * dt, tol, max_iters);
  }

 private:
  const Discretization& disc_;
  mutable std::vector<double> zeta_, u_;
  std::vector<double> a_, b_, na_, nb_;
};

/// Time derivative of a nodal state under the semidiscrete system.
inline WaveState semidiscrete_rhs(const WaveState& s, const Discretization& disc) {
  const SpectralFlow flow(disc);
  return disc.inverse(flow.rhs(disc.forward(s)));
}

inline WaveState implicit_midpoint_step(const WaveState& s, const Discretization& disc,
                                        double h_step, const EvolveConfig& cfg) {
  const SpectralFlow flow(disc);
  return disc.inverse(
      flow.midpoint(disc.forward(s), h_step, cfg.stage_tolerance, cfg.stage_max_iters));
}

inline WaveState composition_step(const WaveState& s, const Discretization& disc,
                                  const EvolveConfig& cfg) {
  const SpectralFlow flow(disc);
  return disc.inverse(
      flow.compose(disc.forward(s), cfg.dt, cfg.stage_tolerance, cfg.stage_max_iters));
}

/// E_h = 1/2 ((1-gamma) <Z, J_c Z> + <U, L U>) - (eps / 2 gamma) sum Z U^2, with the
/// Euclidean inner product over the nodes.
inline double discrete_energy(const SpectralPair& y, const Discretization& disc) {
  const auto& sym = disc.symbols();
  const auto& sys = disc.system();
  const std::size_t nh = y.zeta.size();
  const double n = static_cast<double>(disc.size());
  double quad = 0.0;
  for (std::size_t k = 0; k < nh; ++k)
    quad += mode_weight(k, nh) *
            ((1.0 - sys.gamma) * sym.jc[k] * std::norm(y.zeta[k]) + sym.l[k] * std::norm(y.u[k]));
  auto& fft = disc.transform();
  const auto z = fft.inverse_half(y.zeta);
  const auto u = fft.inverse_half(y.u);
  double cubic = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) cubic += z[j] * u[j] * u[j];
  return 0.5 * n * quad - sys.epsilon / (2.0 * sys.gamma) * cubic;
}

inline double discrete_energy(const WaveState& s, const Discretization& disc) {
  return discrete_energy(disc.forward(s), disc);
}

/// I_h = <Z, J_b U>
inline double discrete_momentum(const SpectralPair& y, const Discretization& disc) {
  const auto& sym = disc.symbols();
  const std::size_t nh = y.zeta.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < nh; ++k)
    acc += mode_weight(k, nh) * sym.jb[k] *
           (y.zeta[k].real() * y.u[k].real() + y.zeta[k].imag() * y.u[k].imag());
  return static_cast<double>(disc.size()) * acc;
}

inline double discrete_momentum(const WaveState& s, const Discretization& disc) {
  return discrete_momentum(disc.forward(s), disc);
}

struct Snapshot {
  long step = 0;
  double t = 0.0;
  SpectralPair spectrum;
};

struct EvolveResult {
  SpectralPair final_spectrum;
  double t_final = 0.0;
  long steps_taken = 0;
  InvariantSeries invariants;
  std::vector<Snapshot> snapshots;
  /// Set when a step failed; the fields above hold everything up to that point.
  std::optional<std::string> failure;

  bool ok() const noexcept { return !failure.has_value(); }
};

/// Called at every record with the step index, time and spectral state.
using EvolveObserver = std::function<void(long, double, const SpectralPair&)>;

/// Marches the fourth-order composition method to t_final, recording invariants
/// (and optionally snapshots) every record_every steps, including t = 0 and the end.
inline EvolveResult evolve(const SpectralPair& initial, const Discretization& disc,
                           const EvolveConfig& cfg, const EvolveObserver& observer = {}) {
  cfg.validate(disc.grid());
  const long n_steps = cfg.steps();
  const SpectralFlow flow(disc);
  EvolveResult res;
  SpectralPair y = initial;

  auto record = [&](long step, double t) {
    res.invariants.times.push_back(t);
    res.invariants.energy.push_back(discrete_energy(y, disc));
    res.invariants.momentum.push_back(discrete_momentum(y, disc));
    if (cfg.keep_snapshots) res.snapshots.push_back({step, t, y});
    if (observer) observer(step, t, y);
  };

  record(0, 0.0);
  for (long step = 1; step <= n_steps; ++step) {
    try {
      y = flow.compose(y, cfg.dt, cfg.stage_tolerance, cfg.stage_max_iters);
    } catch (const StepFailure& e) {
      res.failure = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    res.steps_taken = step;
    const double t = static_cast<double>(step) * cfg.dt;
    res.t_final = t;
    if (step % cfg.record_every == 0 || step == n_steps) record(step, t);
  }
  res.final_spectrum = std::move(y);
  return res;
}

inline EvolveResult evolve(const WaveState& initial, const Discretization& disc,
                           const EvolveConfig& cfg, const EvolveObserver& observer = {}) {
  return evolve(disc.forward(initial), disc, cfg, observer);
}

}  // namespace bfd
