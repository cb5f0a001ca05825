#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bfd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain where the model or an operation is defined.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// The (b, d, a, c) sign pattern is not one of the linearly well-posed rows.
class NotWellPosedError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an interface contract (sizes, symbol parity, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of a numerical routine does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The 2x2 profile matrix of one Fourier mode is numerically singular.
class SingularModeError : public Error {
 public:
  SingularModeError(int mode, double determinant)
      : Error("singular profile matrix at mode k=" + std::to_string(mode) +
              " (det=" + std::to_string(determinant) + ")"),
        mode_(mode),
        determinant_(determinant) {}

  int mode() const noexcept { return mode_; }
  double determinant() const noexcept { return determinant_; }

 private:
  int mode_;
  double determinant_;
};

/// The Petviashvili stabilizing factor is 0/0 (e.g. the zero iterate).
class DegenerateIterateError : public Error {
 public:
  using Error::Error;
};

/// An iteration ran out of steps; carries the residual history for diagnosis.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// An implicit stage did not converge inside a time step.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, int iterations, double last_update)
      : Error(what), iterations_(iterations), last_update_(last_update) {}

  int iterations() const noexcept { return iterations_; }
  double last_update() const noexcept { return last_update_; }

 private:
  int iterations_;
  double last_update_;
};

}  // namespace bfd
