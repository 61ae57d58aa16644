#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glhydro {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: sizes that do not match, empty inputs, out-of-range parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A quadrature that did not reach its tolerance after the maximum refinement.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : Error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Iterative solver (Newton, inverse iteration) that ran out of iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the range covered by a tabulation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical inconsistency detected at run time (e.g. a non-negligible
/// imaginary part in a Fourier inversion that should be real).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// SDE integration blew up.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Explicit PDE step requested with a time step above the stability limit.
class CflError : public Error {
 public:
  CflError(double requested_dt, double required_dt)
      : Error("time step " + std::to_string(requested_dt) + " violates CFL; need dt <= " +
              std::to_string(required_dt)),
        required_dt_(required_dt) {}
  double required_dt() const noexcept { return required_dt_; }

 private:
  double required_dt_;
};

}  // namespace glhydro
