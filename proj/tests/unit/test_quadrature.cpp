#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "glhydro/free_energy.hpp"
#include "glhydro/potential.hpp"
#include "glhydro/quadrature.hpp"

using namespace glhydro;

namespace {

// Reference tilt moments by adaptive Gauss-Kronrod on a wide interval.
TiltMoments reference(const Potential& pot, double sigma) {
  using boost::math::quadrature::gauss_kronrod;
  auto w = [&](double x) { return std::exp(sigma * x - pot.value(x)); };
  const double lo = -15.0 + sigma / 2, hi = 15.0 + sigma / 2;
  const double z = gauss_kronrod<double, 61>::integrate(w, lo, hi, 15, 1e-14);
  const double m = gauss_kronrod<double, 61>::integrate([&](double x) { return x * w(x); }, lo, hi, 15, 1e-14) / z;
  const double s2 =
      gauss_kronrod<double, 61>::integrate([&](double x) { return (x - m) * (x - m) * w(x); }, lo, hi, 15, 1e-14) / z;
  return {sigma, m, s2, std::log(z)};
}

}  // namespace

TEST(Potential, DerivativesMatchFiniteDifferences) {
  for (const auto& pot : {Potential::gaussian(), Potential::quartic(), Potential::perturbed_quartic(0.2)}) {
    for (double x = -2.5; x <= 2.5; x += 0.37) {
      const double h = 1e-5;
      const auto e = pot.eval(x);
      EXPECT_NEAR(e.d1, (pot.value(x + h) - pot.value(x - h)) / (2 * h), 1e-6 * (1 + std::abs(e.d1)));
      EXPECT_NEAR(e.d2, (pot.d1(x + h) - pot.d1(x - h)) / (2 * h), 1e-5 * (1 + std::abs(e.d2)));
      EXPECT_NEAR(pot.d1(x), e.d1, 1e-12 * (1 + std::abs(e.d1)));
    }
  }
}

TEST(Potential, PerturbationIsBounded) {
  const auto pot = Potential::perturbed_quartic(0.1);
  const auto q = Potential::quartic();
  double lo = INFINITY, hi = -INFINITY;
  for (double x = -10; x <= 10; x += 1e-3) {
    const double d = pot.value(x) - q.value(x);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  EXPECT_LE(hi - lo, pot.delta_osc() + 1e-12);
}

TEST(Tilt, GaussianClosedForm) {
  const auto pot = Potential::gaussian();
  for (double s : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    const auto t = log_partition_1d(pot, s, 1e-10);
    EXPECT_NEAR(t.log_z, 0.5 * std::log(2 * std::numbers::pi) + 0.5 * s * s, 1e-9);
    EXPECT_NEAR(t.m, s, 1e-9);
    EXPECT_NEAR(t.s2, 1.0, 1e-9);
  }
}

TEST(Tilt, QuarticAgainstGaussKronrod) {
  for (const auto& pot : {Potential::quartic(), Potential::perturbed_quartic(0.1)}) {
    for (double s : {-4.0, -1.0, 0.0, 0.3, 2.5}) {
      const auto t = log_partition_1d(pot, s, 1e-10);
      const auto r = reference(pot, s);
      EXPECT_NEAR(t.log_z, r.log_z, 1e-9);
      EXPECT_NEAR(t.m, r.m, 1e-9);
      EXPECT_NEAR(t.s2, r.s2, 1e-9);
    }
  }
}

// d/dsigma log Z = mean and d/dsigma mean = variance.
TEST(Tilt, MomentsAreDerivativesOfLogZ) {
  const auto pot = Potential::quartic();
  const double h = 1e-4;
  for (double s : {-2.0, 0.0, 1.5}) {
    const auto t = log_partition_1d(pot, s, 1e-11);
    const auto p = log_partition_1d(pot, s + h, 1e-11);
    const auto m = log_partition_1d(pot, s - h, 1e-11);
    EXPECT_NEAR(t.m, (p.log_z - m.log_z) / (2 * h), 1e-6);
    EXPECT_NEAR(t.s2, (p.m - m.m) / (2 * h), 1e-6);
  }
}

TEST(Tilt, DiscreteTiltNormalizedAndQuantileMonotone) {
  const auto tilt = DiscreteTilt::build(Potential::quartic(), 0.7, 1e-10);
  double w = 0;
  for (double p : tilt.probs()) w += p;
  EXPECT_NEAR(w, 1.0, 1e-12);
  double prev = -INFINITY;
  for (int i = 1; i < 200; ++i) {
    const double q = tilt.quantile(i / 200.0);
    EXPECT_GE(q, prev);
    prev = q;
  }
  EXPECT_NEAR(tilt.expect([](double x) { return x; }), tilt.moments().m, 1e-12);
}

TEST(Tilt, SolvePsiPrimeInverts) {
  const auto pot = Potential::perturbed_quartic(0.1);
  for (double t : {-5.0, -0.2, 0.0, 3.0}) EXPECT_NEAR(pot.d1(solve_psi_prime(pot, t)), t, 1e-10);
}
