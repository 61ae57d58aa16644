#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "glhydro/potential.hpp"

namespace glhydro {

/// Moments of the one-site exponential tilt mu_sigma(dx) ∝ exp(sigma x - psi(x)) dx.
struct TiltMoments {
  double sigma = 0.0;
  double m = 0.0;      ///< mean
  double s2 = 0.0;     ///< variance
  double log_z = 0.0;  ///< phi*(sigma) = log ∫ exp(sigma x - psi(x)) dx
};

/// A tilt discretized by the trapezoid rule on an adaptively truncated interval.
///
/// The interval grows from the mode until the integrand drops below a relative
/// cutoff derived from tol; the node spacing is halved until log Z, the mean and
/// the variance all change by less than tol. Because the integrand is smooth and
/// decays super-exponentially, the trapezoid rule converges spectrally and the
/// last difference is a conservative error estimate.
class DiscreteTilt {
 public:
  /// max_frequency > 0 additionally forces spacing * max_frequency <= 1 so that
  /// centered_cf stays alias-free up to that frequency.
  static DiscreteTilt build(const Potential& pot, double sigma, double tol,
                            double max_frequency = 0.0);

  const TiltMoments& moments() const noexcept { return moments_; }
  double third_central() const noexcept { return third_; }
  double spacing() const noexcept { return spacing_; }
  double error_estimate() const noexcept { return error_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// h(sigma, xi) = ∫ exp(i (x - m) xi) mu_sigma(dx).
  std::complex<double> centered_cf(double xi) const;

  /// Inverse CDF of the piecewise-linear density through the nodes.
  double quantile(double u) const;

  /// ∫ f dmu_sigma on the same nodes.
  double expect(const std::function<double(double)>& f) const;

 private:
  TiltMoments moments_;
  double third_ = 0.0;
  double spacing_ = 0.0;
  double error_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Solves psi'(x) = target for x (psi' is increasing for the built-ins).
double solve_psi_prime(const Potential& pot, double target);

/// Relative cutoff (as a log) used when truncating integrals for tolerance tol.
double log_cutoff(double tol);

/// Internal quadrature tolerance derived from a user tolerance.
double inner_tol(double tol);

/// Result of an adaptive trapezoid integral of exp(log_f) carried in log form.
struct LogIntegral {
  double log_value = 0.0;
  double rel_error = 0.0;
};

/// ∫ exp(log_f(u)) du over R by truncation-walk from `center` followed by
/// doubling refinement. `scale` sets the initial step of the walk.
LogIntegral integrate_log_1d(const std::function<double(double)>& log_f, double center,
                             double scale, double tol);

}  // namespace glhydro
