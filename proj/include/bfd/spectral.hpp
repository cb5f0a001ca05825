#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bfd/error.hpp"
#include "bfd/model_params.hpp"

namespace bfd {

using Complex = std::complex<double>;

/// Uniform periodic collocation grid x_j = -L + j h on [-L, L), h = 2L/N.
///
/// Spectra use the standard transform order: index j holds the signed mode
/// k = j for j < N/2 and k = j - N otherwise, so the Nyquist mode is k = -N/2.
class PeriodicGrid {
 public:
  PeriodicGrid(double half_length, std::size_t n_modes) : half_length_(half_length), n_(n_modes) {
    if (!(half_length > 0.0)) throw ParameterDomainError("grid half length must be positive");
    if (n_modes < 2 || n_modes % 2 != 0)
      throw ParameterDomainError("grid size must be a positive even integer");
  }

  double half_length() const noexcept { return half_length_; }
  std::size_t size() const noexcept { return n_; }
  /// Number of stored coefficients of a real field (modes 0..N/2).
  std::size_t half_size() const noexcept { return n_ / 2 + 1; }
  double spacing() const noexcept { return 2.0 * half_length_ / static_cast<double>(n_); }
  double period() const noexcept { return 2.0 * half_length_; }

  double node(std::size_t j) const noexcept {
    return -half_length_ + static_cast<double>(j) * spacing();
  }

  std::vector<double> nodes() const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = node(j);
    return x;
  }

  int signed_mode(std::size_t index) const noexcept {
    const auto i = static_cast<long>(index);
    const auto n = static_cast<long>(n_);
    return static_cast<int>(i < n / 2 ? i : i - n);
  }

  std::size_t index_of(int k) const noexcept {
    const auto n = static_cast<long>(n_);
    return static_cast<std::size_t>(((k % n) + n) % n);
  }

  /// k~ = pi k / L
  double wavenumber(int k) const noexcept {
    return std::numbers::pi * static_cast<double>(k) / half_length_;
  }

  /// Centre of the index-reversal symmetry: x_j + x_{N-1-j} = -h.
  double reflection_center() const noexcept { return -0.5 * spacing(); }

  /// Wraps x into [-L, L).
  double wrap(double x) const noexcept {
    const double p = period();
    double y = std::fmod(x + half_length_, p);
    if (y < 0.0) y += p;
    return y - half_length_;
  }

  bool operator==(const PeriodicGrid&) const = default;

 private:
  double half_length_;
  std::size_t n_;
};

namespace detail {

// FFTW planning is not thread safe.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

inline void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw ContractError(std::string(what) + ": length " + std::to_string(got) + ", expected " +
                        std::to_string(want));
}

}  // namespace detail

/// Real-to-complex discrete Fourier transform with normalized coefficients,
///
///   F_k = (1/N) sum_j f_j exp(-2 pi i j k / N),   f_j = sum_k F_k exp(2 pi i j k / N).
///
/// Owns its FFTW plans and scratch buffers; use one instance per thread.
class FourierTransform {
 public:
  explicit FourierTransform(std::size_t n) : n_(n) {
    if (n < 2 || n % 2 != 0) throw ContractError("transform length must be even and >= 2");
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n_)));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n_ / 2 + 1))));
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int ni = static_cast<int>(n_);
    forward_ = fftw_plan_dft_r2c_1d(ni, real_.get(), spec_.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(ni, spec_.get(), real_.get(), FFTW_ESTIMATE);
  }

  ~FourierTransform() { release(); }

  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  FourierTransform(FourierTransform&& other) noexcept
      : n_(other.n_),
        real_(std::move(other.real_)),
        spec_(std::move(other.spec_)),
        forward_(std::exchange(other.forward_, nullptr)),
        inverse_(std::exchange(other.inverse_, nullptr)) {}

  FourierTransform& operator=(FourierTransform&& other) noexcept {
    if (this != &other) {
      release();
      n_ = other.n_;
      real_ = std::move(other.real_);
      spec_ = std::move(other.spec_);
      forward_ = std::exchange(other.forward_, nullptr);
      inverse_ = std::exchange(other.inverse_, nullptr);
    }
    return *this;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t half_size() const noexcept { return n_ / 2 + 1; }

  /// Coefficients of modes 0..N/2 of a real field.
  void forward(std::span<const double> nodal, std::span<Complex> half) {
    detail::require_size(nodal.size(), n_, "forward transform input");
    detail::require_size(half.size(), half_size(), "forward transform output");
    std::copy(nodal.begin(), nodal.end(), real_.get());
    fftw_execute(forward_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t k = 0; k < half.size(); ++k)
      half[k] = Complex(spec_.get()[k][0] * scale, spec_.get()[k][1] * scale);
  }

  /// Real field from its half spectrum. The imaginary parts of the k = 0 and
  /// Nyquist coefficients are ignored.
  void inverse(std::span<const Complex> half, std::span<double> nodal) {
    detail::require_size(half.size(), half_size(), "inverse transform input");
    detail::require_size(nodal.size(), n_, "inverse transform output");
    for (std::size_t k = 0; k < half.size(); ++k) {
      spec_.get()[k][0] = half[k].real();
      spec_.get()[k][1] = half[k].imag();
    }
    fftw_execute(inverse_);
    std::copy(real_.get(), real_.get() + n_, nodal.begin());
  }

  std::vector<Complex> forward_half(std::span<const double> nodal) {
    std::vector<Complex> half(half_size());
    forward(nodal, half);
    return half;
  }

  std::vector<double> inverse_half(std::span<const Complex> half) {
    std::vector<double> nodal(n_);
    inverse(half, nodal);
    return nodal;
  }

  /// Full length-N spectrum in standard order.
  std::vector<Complex> forward_full(std::span<const double> nodal) {
    std::vector<Complex> half(half_size());
    forward(nodal, half);
    std::vector<Complex> full(n_);
    for (std::size_t k = 0; k <= n_ / 2; ++k) full[k] = half[k];
    for (std::size_t k = 1; k < n_ / 2; ++k) full[n_ - k] = std::conj(half[k]);
    return full;
  }

  /// Inverse of forward_full. The spectrum must be that of a real field:
  /// conjugate symmetric to 1e-12 relative, otherwise ContractError.
  std::vector<double> inverse_full(std::span<const Complex> full) {
    detail::require_size(full.size(), n_, "inverse transform input");
    double scale = 0.0;
    for (const auto& c : full) scale = std::max(scale, std::abs(c));
    const double tol = 1e-12 * std::max(scale, 1e-300);
    for (std::size_t k = 1; k < n_ / 2; ++k)
      if (std::abs(full[k] - std::conj(full[n_ - k])) > tol)
        throw ContractError("spectrum is not conjugate symmetric at mode " + std::to_string(k));
    if (std::abs(full[0].imag()) > tol || std::abs(full[n_ / 2].imag()) > tol)
      throw ContractError("mean and Nyquist coefficients of a real field must be real");
    return inverse_half(full.first(n_ / 2 + 1));
  }

 private:
  void release() noexcept {
    if (forward_ == nullptr && inverse_ == nullptr) return;
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (forward_ != nullptr) fftw_destroy_plan(forward_);
    if (inverse_ != nullptr) fftw_destroy_plan(inverse_);
    forward_ = inverse_ = nullptr;
  }

  std::size_t n_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Weight of half-spectrum entry k in a sum over the full spectrum.
inline double mode_weight(std::size_t k, std::size_t half_size) noexcept {
  return (k == 0 || k + 1 == half_size) ? 1.0 : 2.0;
}

/// Re sum_full conj(a_k) b_k from half spectra of two real fields.
inline double half_inner(std::span<const Complex> a, std::span<const Complex> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    s += mode_weight(k, a.size()) * (a[k].real() * b[k].real() + a[k].imag() * b[k].imag());
  return s;
}

/// sum_full |a_k|^2 from a half spectrum.
inline double half_norm2(std::span<const Complex> a) { return half_inner(a, a); }

// ---------------------------------------------------------------------------
// Symbols

namespace detail {

// |k| coth(sqrt(mu2)|k|). Series near the removable singularity, coth = 1 for large argument.
inline double abs_k_coth(double k, double sqrt_mu2) noexcept {
  const double ak = std::abs(k);
  const double y = sqrt_mu2 * ak;
  if (y < 1e-8) return 1.0 / sqrt_mu2 + ak * y / 3.0;
  if (y > 30.0) return ak;
  return ak / std::tanh(y);
}

// k^2 coth^2(sqrt(mu2)|k|)
inline double k2_coth2(double k, double sqrt_mu2) noexcept {
  const double ak = std::abs(k);
  const double y = sqrt_mu2 * ak;
  if (y < 1e-8) {
    const double t = 1.0 / sqrt_mu2 + ak * y / 3.0;
    return t * t;
  }
  if (y > 30.0) return ak * ak;
  const double t = ak / std::tanh(y);
  return t * t;
}

}  // namespace detail

/// Symbol of the nonlocal operator L_{mu2} at wavenumber k~ (continuous at 0).
inline double eval_symbol_l(double k, const AbcdSystem& s) {
  const double g = s.gamma;
  const double sqrt_mu2 = std::sqrt(s.mu2);
  return 1.0 / g - std::sqrt(s.mu) / (g * g) * detail::abs_k_coth(k, sqrt_mu2) -
         (s.mu / g) * (s.a * k * k - detail::k2_coth2(k, sqrt_mu2) / (g * g));
}

/// Symbols of J_b = 1 - mu b dx^2, J_d = 1 - mu d dx^2, J_c = 1 + mu c dx^2.
inline double eval_symbol_jb(double k, const AbcdSystem& s) noexcept { return 1.0 + s.mu * s.b * k * k; }
inline double eval_symbol_jd(double k, const AbcdSystem& s) noexcept { return 1.0 + s.mu * s.d * k * k; }
inline double eval_symbol_jc(double k, const AbcdSystem& s) noexcept { return 1.0 - s.mu * s.c * k * k; }

/// Per-mode symbol values on a grid, full length N in standard order.
struct SymbolSet {
  std::vector<double> jb, jd, jc, l;
  /// i k~, with the Nyquist entry set to zero so derivatives of real fields stay real.
  std::vector<Complex> deriv;
  /// k~ itself (Nyquist entry kept), for convenience.
  std::vector<double> wavenumber;

  static SymbolSet build(const PeriodicGrid& grid, const AbcdSystem& sys) {
    const std::size_t n = grid.size();
    SymbolSet out;
    out.jb.resize(n);
    out.jd.resize(n);
    out.jc.resize(n);
    out.l.resize(n);
    out.deriv.resize(n);
    out.wavenumber.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const int k = grid.signed_mode(j);
      const double kt = grid.wavenumber(k);
      out.wavenumber[j] = kt;
      out.jb[j] = eval_symbol_jb(kt, sys);
      out.jd[j] = eval_symbol_jd(kt, sys);
      out.jc[j] = eval_symbol_jc(kt, sys);
      out.l[j] = eval_symbol_l(kt, sys);
      out.deriv[j] = (j == n / 2) ? Complex(0.0, 0.0) : Complex(0.0, kt);
    }
    return out;
  }

  std::size_t size() const noexcept { return jb.size(); }
};

namespace detail {

inline void check_real_output_symbol(std::span<const Complex> symbol) {
  const std::size_t n = symbol.size();
  double scale = 0.0;
  for (const auto& s : symbol) scale = std::max(scale, std::abs(s));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  for (std::size_t k = 1; k < n / 2; ++k)
    if (std::abs(symbol[n - k] - std::conj(symbol[k])) > tol)
      throw ContractError("symbol would produce a complex field (mode " + std::to_string(k) +
                          "): it must be even-real or odd-imaginary");
  if (std::abs(symbol[0].imag()) > tol || std::abs(symbol[n / 2].imag()) > tol)
    throw ContractError("symbol must be real at the mean and Nyquist modes");
}

}  // namespace detail

/// inverse(symbol * forward(field)) for a full-layout multiplier.
inline std::vector<double> apply_operator(std::span<const Complex> symbol,
                                          std::span<const double> field, FourierTransform& fft) {
  detail::require_size(symbol.size(), fft.size(), "operator symbol");
  detail::check_real_output_symbol(symbol);
  auto half = fft.forward_half(field);
  for (std::size_t k = 0; k < half.size(); ++k) half[k] *= symbol[k];
  return fft.inverse_half(half);
}

inline std::vector<double> apply_operator(std::span<const double> symbol,
                                          std::span<const double> field, FourierTransform& fft) {
  std::vector<Complex> c(symbol.begin(), symbol.end());
  return apply_operator(std::span<const Complex>(c), field, fft);
}

/// Index reversal (U_1..U_N) -> (U_N..U_1).
inline std::vector<double> reflect(std::span<const double> field) {
  return {field.rbegin(), field.rend()};
}

/// f(x) -> f(x - shift) through a spectral phase shift.
inline std::vector<double> spectral_shift(std::span<const double> field, double shift,
                                          const PeriodicGrid& grid, FourierTransform& fft) {
  auto half = fft.forward_half(field);
  const std::size_t nyq = half.size() - 1;
  for (std::size_t k = 0; k < half.size(); ++k) {
    const double phase = -grid.wavenumber(static_cast<int>(k)) * shift;
    if (k == nyq)
      half[k] *= std::cos(phase);
    else
      half[k] *= Complex(std::cos(phase), std::sin(phase));
  }
  return fft.inverse_half(half);
}

/// Value and first two derivatives of the trigonometric interpolant at x.
struct InterpolantSample {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

inline InterpolantSample eval_interpolant(std::span<const Complex> half, double x,
                                          const PeriodicGrid& grid) {
  const std::size_t nyq = half.size() - 1;
  const double xi = x + grid.half_length();
  InterpolantSample s;
  s.value = half[0].real();
  for (std::size_t k = 1; k <= nyq; ++k) {
    const double kt = grid.wavenumber(static_cast<int>(k));
    const double c = std::cos(kt * xi);
    const double sn = std::sin(kt * xi);
    const double re = half[k].real();
    const double im = half[k].imag();
    if (k == nyq) {
      // Nyquist mode carried as re cos(k x); its derivative is dropped.
      s.value += re * c;
      continue;
    }
    s.value += 2.0 * (re * c - im * sn);
    s.first += 2.0 * kt * (-re * sn - im * c);
    s.second += -2.0 * kt * kt * (re * c - im * sn);
  }
  return s;
}

/// Vertex of the parabola through (-h, fm), (0, f0), (h, fp): offset from the middle node and value.
struct QuadraticPeak {
  double offset = 0.0;
  double value = 0.0;
};

inline QuadraticPeak quadratic_peak(double fm, double f0, double fp, double h) noexcept {
  const double curv = fm - 2.0 * f0 + fp;
  if (curv == 0.0) return {0.0, f0};
  const double slope = fm - fp;
  double off = 0.5 * slope / curv;
  off = std::clamp(off, -1.0, 1.0);
  return {off * h, f0 - 0.125 * slope * slope / curv};
}

/// Critical point of the interpolant near x0 by Newton iteration on its derivative.
/// Steps are limited to one grid cell; returns x0 unchanged if the curvature vanishes.
inline double refine_extremum(std::span<const Complex> half, double x0, const PeriodicGrid& grid,
                              int max_iterations = 30) {
  const double h = grid.spacing();
  double x = x0;
  for (int it = 0; it < max_iterations; ++it) {
    const auto s = eval_interpolant(half, x, grid);
    if (s.second == 0.0) break;
    const double step = std::clamp(s.first / s.second, -h, h);
    x -= step;
    if (std::abs(step) <= 1e-14 * (grid.half_length() + std::abs(x))) break;
  }
  return x;
}

/// Paired nodal fields (zeta, u).
struct WaveState {
  std::vector<double> zeta;
  std::vector<double> u;

  WaveState() = default;
  WaveState(std::vector<double> z, std::vector<double> v) : zeta(std::move(z)), u(std::move(v)) {
    if (zeta.size() != u.size()) throw ContractError("zeta and u must have equal length");
  }
  explicit WaveState(std::size_t n) : zeta(n, 0.0), u(n, 0.0) {}

  std::size_t size() const noexcept { return zeta.size(); }
};

/// Half spectra of a WaveState.
struct SpectralPair {
  std::vector<Complex> zeta;
  std::vector<Complex> u;
};

/// Grid, parameters, symbols and a transform bundled for the solvers.
///
/// Not thread safe because of the transform scratch; one instance per worker.
class Discretization {
 public:
  Discretization(PeriodicGrid grid, AbcdSystem sys, bool dealias = false)
      : grid_(grid),
        sys_(sys),
        symbols_(SymbolSet::build(grid, sys)),
        fft_(grid.size()),
        dealias_(dealias) {
    sys_.validate();
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  const AbcdSystem& system() const noexcept { return sys_; }
  const SymbolSet& symbols() const noexcept { return symbols_; }
  FourierTransform& transform() const noexcept { return fft_; }
  bool dealias() const noexcept { return dealias_; }
  std::size_t size() const noexcept { return grid_.size(); }
  std::size_t half_size() const noexcept { return grid_.half_size(); }

  /// Derivative multiplier k~ on half-spectrum entry k (zero at Nyquist).
  double deriv_half(std::size_t k) const noexcept {
    return k + 1 == half_size() ? 0.0 : symbols_.wavenumber[k];
  }

  SpectralPair forward(const WaveState& s) const {
    return {fft_.forward_half(s.zeta), fft_.forward_half(s.u)};
  }

  WaveState inverse(const SpectralPair& p) const {
    return WaveState(fft_.inverse_half(p.zeta), fft_.inverse_half(p.u));
  }

  /// Half spectrum of the Hadamard product a.*b, optionally 2/3-truncated.
  void product_spectrum(std::span<const double> a, std::span<const double> b,
                        std::span<Complex> out) const {
    scratch_.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) scratch_[j] = a[j] * b[j];
    fft_.forward(scratch_, out);
    if (dealias_) {
      const std::size_t cut = grid_.size() / 3;
      for (std::size_t k = cut + 1; k < out.size(); ++k) out[k] = 0.0;
    }
  }

 private:
  PeriodicGrid grid_;
  AbcdSystem sys_;
  SymbolSet symbols_;
  mutable FourierTransform fft_;
  mutable std::vector<double> scratch_;
  bool dealias_;
};

}  // namespace bfd
