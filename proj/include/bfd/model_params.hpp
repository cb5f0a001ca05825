#pragma once

#include <array>
#include <cmath>
#include <string>

#include "bfd/error.hpp"

namespace bfd {

/// Absolute tolerance under which a coefficient counts as zero for sign tests.
inline constexpr double kSignTolerance = 1e-14;

/// Modelling parameters (alpha1, alpha2, beta) from which a, b, c, d derive.
struct ModelingParameters {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta = 0.0;

  bool admissible() const noexcept { return alpha1 >= 0.0 && alpha2 <= 1.0 && beta >= 0.0; }
};

struct AbcdCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

/// Full parameterization of a scaled B/FD system.
///
/// gamma is the density ratio of the two layers; epsilon, mu, mu2 are the
/// nonlinearity/shallowness parameters of the scaled equations.
struct AbcdSystem {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double gamma = 0.8;
  double epsilon = 1.0;
  double mu = 1.0;
  double mu2 = 10.0;

  AbcdSystem() = default;
  AbcdSystem(const AbcdCoefficients& k, double gamma_, double epsilon_ = 1.0, double mu_ = 1.0,
             double mu2_ = 10.0)
      : a(k.a), b(k.b), c(k.c), d(k.d), gamma(gamma_), epsilon(epsilon_), mu(mu_), mu2(mu2_) {}

  double epsilon_db() const noexcept { return d - b; }
  bool hamiltonian() const noexcept { return std::abs(b - d) <= kSignTolerance; }

  bool linearly_well_posed() const noexcept {
    return b >= -kSignTolerance && d >= -kSignTolerance && a <= kSignTolerance &&
           c <= kSignTolerance;
  }

  /// sqrt(mu / mu2)
  double nu_sqrt() const noexcept { return std::sqrt(mu / mu2); }
  /// mu / mu2
  double nu_ratio() const noexcept { return mu / mu2; }

  /// Throws ParameterDomainError unless gamma in (0,1) and epsilon, mu, mu2 > 0.
  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw ParameterDomainError("gamma must lie in (0,1), got " + std::to_string(gamma));
    // epsilon = 0 is kept for the linearized system
    if (!(epsilon >= 0.0) || !(mu > 0.0) || !(mu2 > 0.0))
      throw ParameterDomainError("epsilon must be non-negative and mu, mu2 positive");
  }
};

inline AbcdCoefficients derive_abcd(const ModelingParameters& p) {
  if (!p.admissible())
    throw ParameterDomainError("modelling parameters need alpha1 >= 0, alpha2 <= 1, beta >= 0");
  return {(1.0 - p.alpha1 - 3.0 * p.beta) / 3.0, p.alpha1 / 3.0, p.beta * p.alpha2,
          p.beta * (1.0 - p.alpha2)};
}

struct ReducedParameters {
  ModelingParameters modeling;
  AbcdSystem system;
};

/// The one-parameter family used in the experiments: alpha1 = 1, alpha2 = -1/2,
/// epsilon = mu = 1, mu2 = 10, with d - b = epsilon_db selecting the case.
inline ReducedParameters reduced_parameters(double epsilon_db, double gamma = 0.8) {
  const double beta = (2.0 / 3.0) * (1.0 / 3.0 + epsilon_db);
  if (!(beta >= 0.0))
    throw ParameterDomainError("reduced parameters need 1/3 + epsilon_db >= 0");
  ReducedParameters out;
  out.modeling = {1.0, -0.5, beta};
  const double b = 1.0 / 3.0;
  out.system = AbcdSystem({-beta, b, -beta / 2.0, b + epsilon_db}, gamma, 1.0, 1.0, 10.0);
  return out;
}

enum class Sign { negative, zero, positive };

inline Sign sign_of(double v) noexcept {
  if (std::abs(v) <= kSignTolerance) return Sign::zero;
  return v > 0.0 ? Sign::positive : Sign::negative;
}

inline char sign_char(Sign s) noexcept {
  switch (s) {
    case Sign::positive: return '+';
    case Sign::negative: return '-';
    default: return '0';
  }
}

/// One row of the linear well-posedness table.
struct SystemClass {
  int row_index = 0;
  std::array<Sign, 4> sign_pattern{};  // (b, d, a, c)
  bool relevant = false;
  std::string wellposedness_label;

  std::string signs() const {
    return {sign_char(sign_pattern[0]), sign_char(sign_pattern[1]), sign_char(sign_pattern[2]),
            sign_char(sign_pattern[3])};
  }
};

namespace detail {

struct TableRow {
  bool relevant;
  const char* label;
};

// Rows ordered by (b==0, d==0, a==0, c==0) read as a binary number.
inline constexpr std::array<TableRow, 16> kClassTable{{
    {true, "Theorem 2.1(i) H^s x H^s, s>=0 (generic B/FD)"},
    {true, "Theorem 2.1(ii) H^s x H^(s-1), s>=0"},
    {true, "Theorem 2.1(i) H^s x H^s, s>=0"},
    {true, "Theorem 2.1(ii) H^(s-1) x H^s, s>=0 (BBM-BBM B/FD)"},
    {false, "Theorem 2.5 H^(s+1) x H^s, s>3/2"},
    {true, "Theorem 2.4 H^s x H^s, s>3/2"},
    {false, "Theorem 2.5 H^(s+1) x H^s, s>3/2"},
    {true, "Theorem 2.4 H^s x H^s, s>3/2"},
    {true, "Theorem 2.3 H^s x H^(s+1), s>1/2"},
    {true, "Theorem 2.2 H^s x H^(s+2), s>1/2"},
    {true, "Theorem 2.3 H^s x H^(s+1), s>1/2"},
    {true, "Theorem 2.2 H^s x H^(s+2), s>1/2"},
    {false, ""},
    {false, ""},
    {false, ""},
    {false, ""},
}};

}  // namespace detail

inline SystemClass classify(double a, double b, double c, double d) {
  const std::array<Sign, 4> s{sign_of(b), sign_of(d), sign_of(a), sign_of(c)};
  if (s[0] == Sign::negative || s[1] == Sign::negative || s[2] == Sign::positive ||
      s[3] == Sign::positive) {
    SystemClass bad;
    bad.sign_pattern = s;
    throw NotWellPosedError("sign pattern (b,d,a,c)=" + bad.signs() +
                            " is not linearly well posed");
  }
  const int index = (s[0] == Sign::zero ? 8 : 0) + (s[1] == Sign::zero ? 4 : 0) +
                    (s[2] == Sign::zero ? 2 : 0) + (s[3] == Sign::zero ? 1 : 0);
  SystemClass out;
  out.row_index = index + 1;
  out.sign_pattern = s;
  out.relevant = detail::kClassTable[index].relevant;
  out.wellposedness_label = detail::kClassTable[index].label;
  return out;
}

inline SystemClass classify(const AbcdSystem& sys) { return classify(sys.a, sys.b, sys.c, sys.d); }

inline SystemClass classify(const AbcdCoefficients& k) { return classify(k.a, k.b, k.c, k.d); }

}  // namespace bfd
