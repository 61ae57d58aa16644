#pragma once

// Reference computations shared by the unit tests. They deliberately avoid the
// library's own quadrature so that agreement is a real cross-check.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <span>

#include "glhydro/potential.hpp"

namespace oracle {

inline double integrate(const std::function<double(double)>& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-14);
}

struct Tilt {
  double log_z, m, s2;
};

/// log ∫ exp(sigma x - psi(x)) dx and the first two moments.
inline Tilt tilt(const glhydro::Potential& pot, double sigma) {
  // Shift by the mode so the integrand peaks at 1.
  const double mode = boost::math::tools::bisect(
      [&](double x) { return sigma - pot.d1(x); }, -50.0, 50.0,
      boost::math::tools::eps_tolerance<double>(50)).first;
  const double peak = sigma * mode - pot.value(mode);
  auto w = [&](double x) { return std::exp(sigma * x - pot.value(x) - peak); };
  const double lo = mode - 12.0, hi = mode + 12.0;
  const double z = integrate(w, lo, hi);
  const double m = integrate([&](double x) { return x * w(x); }, lo, hi) / z;
  const double s2 = integrate([&](double x) { return (x - m) * (x - m) * w(x); }, lo, hi) / z;
  return {std::log(z) + peak, m, s2};
}

/// -(1/2) log of the fiber integral of exp(-H) for K = 2, in the unit-speed
/// parametrization x = (m + v/sqrt2, m - v/sqrt2).
inline double psi_2(const glhydro::Potential& pot, double a0, double a1, double m) {
  auto H = [&](double v) {
    const double x0 = m + v / std::sqrt(2.0), x1 = m - v / std::sqrt(2.0);
    return pot.value(x0) + a0 * x0 + pot.value(x1) + a1 * x1;
  };
  double hmin = INFINITY;
  for (double v = -20; v <= 20; v += 1e-3) hmin = std::min(hmin, H(v));
  const double z = integrate([&](double v) { return std::exp(-(H(v) - hmin)); }, -20.0, 20.0);
  return 0.5 * (hmin - std::log(z));
}

}  // namespace oracle
