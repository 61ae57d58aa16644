#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "glhydro/errors.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/inequality_lab.hpp"
#include "oracles.hpp"

using namespace glhydro;

namespace {

// Gap of the one-dimensional fiber generator for K = 2 from the unitarily
// equivalent Schroedinger operator -d^2 + V'^2/4 - V''/2, V the fiber energy in
// the unit-speed coordinate v (x = m + v/sqrt2, m - v/sqrt2).
double witten_gap(const Potential& pot, double a0, double a1, double m) {
  const double r = 1.0 / std::sqrt(2.0);
  auto V1 = [&](double v) { return (pot.d1(m + v * r) + a0 - pot.d1(m - v * r) - a1) * r; };
  auto V2 = [&](double v) { return 0.5 * (pot.d2(m + v * r) + pot.d2(m - v * r)); };
  const int n = 6000;
  const double L = 8.0, h = 2 * L / (n + 1);
  Eigen::VectorXd diag(n), off(n - 1);
  for (int i = 0; i < n; ++i) {
    const double v = -L + (i + 1) * h;
    diag[i] = 2.0 / (h * h) + 0.25 * V1(v) * V1(v) - 0.5 * V2(v);
  }
  off.setConstant(-1.0 / (h * h));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[1] - es.eigenvalues()[0];
}

}  // namespace

TEST(Cramer, GaussianGapIsExact) {
  const auto rep = check_cramer(Potential::gaussian(), FieldSpec::zero(), std::vector<int>{2, 3, 5},
                                uniform_grid(-1, 1, 9), 1e-10);
  for (const auto& row : rep.rows) {
    EXPECT_NEAR(row.sup_diff, std::log(2 * std::numbers::pi) / (2.0 * row.K), 1e-8);
  }
  EXPECT_NEAR(rep.slope, -1.0, 1e-6);
}

TEST(Cramer, QuarticDifferenceShrinks) {
  const auto rep = check_cramer(Potential::quartic(), FieldSpec::two_point(0.5, 7), std::vector<int>{2, 4, 8},
                                uniform_grid(-2, 2, 21), 1e-9);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LT(rep.rows[i].sup_diff, rep.rows[i - 1].sup_diff);
  EXPECT_LT(rep.slope, -0.6);
}

TEST(Caputo, GaussianRatioIsOne) {
  const auto rep = check_caputo(Potential::gaussian(), uniform_grid(-4, 4, 17), 1e-10);
  EXPECT_NEAR(rep.C, 1.0, 1e-8);
}

TEST(Caputo, QuarticRatioBounded) {
  const auto narrow = check_caputo(Potential::quartic(), uniform_grid(-5, 5, 41), 1e-10);
  const auto wide = check_caputo(Potential::quartic(), uniform_grid(-10, 10, 81), 1e-10);
  EXPECT_TRUE(std::isfinite(wide.C));
  EXPECT_LE(wide.C / narrow.C, 1.5);
}

// For the Gaussian, cov(x, x) = 1 and the right side sup|1/1| * E|1| = 1.
TEST(AsymmetricBrascampLieb, GaussianLinearIsSharp) {
  const Smooth1d id{[](double x) { return x; }, [](double) { return 1.0; }};
  const auto rep = check_asym_bl(Potential::gaussian(), id, id, 1e-10);
  EXPECT_NEAR(rep.lhs, 1.0, 1e-8);
  EXPECT_NEAR(rep.rhs, 1.0, 1e-8);
}

TEST(AsymmetricBrascampLieb, HoldsForPerturbedQuartic) {
  const Smooth1d f{[](double x) { return std::sin(2 * x); }, [](double x) { return 2 * std::cos(2 * x); }};
  const Smooth1d g{[](double x) { return std::tanh(x); },
                   [](double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); }};
  const auto rep = check_asym_bl(Potential::perturbed_quartic(0.1), f, g, 1e-10);
  EXPECT_LE(rep.ratio, 1.0);
  EXPECT_GT(rep.lhs, 0.0);
}

TEST(Covariance, GaussianObservableIsFiberConstant) {
  TestFunctionFamily fam;
  const auto rep = check_covariance_estimate(Potential::gaussian(), std::vector<double>{0.0, 0.0}, 0.3, fam, 1e-10);
  ASSERT_EQ(rep.rows.size(), 20u);
  for (const auto& row : rep.rows) EXPECT_NEAR(row.lhs, 0.0, 1e-10);
}

TEST(Covariance, TwoSitesAgainstQuadrature) {
  const auto pot = Potential::quartic();
  const double a0 = 0.5, a1 = -0.5, m = 0.4;
  const FiberFunction fn{[](std::span<const double> u) { return std::sin(u[0]); },
                         [](std::span<const double> u, std::span<double> g) { g[0] = std::cos(u[0]); }};
  const auto row = covariance_ratio(pot, std::vector<double>{a0, a1}, m, fn, 1e-10, 4001);

  // f = (sin u + 2) / mass after the library's shift to positivity (min -1, max 1).
  auto H = [&](double u) { return pot.value(u) + a0 * u + pot.value(2 * m - u) + a1 * (2 * m - u); };
  const double shift = H(m);
  auto w = [&](double u) { return std::exp(-(H(u) - shift)); };
  const double z = oracle::integrate(w, -8, 8);
  auto E = [&](auto fun) { return oracle::integrate([&](double u) { return fun(u) * w(u); }, -8, 8) / z; };
  const double mass = E([](double u) { return std::sin(u) + 2.0; });
  auto f = [&](double u) { return (std::sin(u) + 2.0) / mass; };
  auto obs = [&](double u) { return 0.5 * (pot.d1(u) + pot.d1(2 * m - u)); };
  const double cov = E([&](double u) { return f(u) * obs(u); }) - E(f) * E(obs);
  const double fisher = E([&](double u) { return std::pow(std::cos(u) / mass, 2) / f(u); });
  EXPECT_NEAR(row.lhs, std::abs(cov), 1e-5 * std::abs(cov));
  EXPECT_NEAR(row.rhs, fisher, 1e-5 * fisher);
  EXPECT_NEAR(row.ratio, cov * cov / (2 * fisher), 1e-4 * row.ratio);
}

TEST(Covariance, QuarticConstantsFiniteForAllFamilies) {
  for (const char* name : {"fourier", "gaussian_bump", "hermite"}) {
    TestFunctionFamily fam;
    fam.kind = test_function_kind_from_name(name);
    for (int K : {2, 3}) {
      const auto block = realize_field(FieldSpec::two_point(0.5, 1), K).values;
      const auto rep = check_covariance_estimate(Potential::quartic(), block, 0.5, fam, 1e-9, K == 2 ? 1001 : 101);
      EXPECT_TRUE(std::isfinite(rep.worst_ratio)) << name;
      EXPECT_LT(rep.mass_error, 1e-8) << name;
    }
  }
  EXPECT_THROW(test_function_kind_from_name("legendre"), ValidationError);
}

TEST(SpectralGap, GaussianIsOne) {
  for (int K : {2, 3}) {
    const std::vector<double> zero(K, 0.0);
    const auto r = spectral_gap_canonical(Potential::gaussian(), zero, 0.0, K == 2 ? 801 : 101);
    EXPECT_NEAR(r.gap, 1.0, K == 2 ? 1e-4 : 1e-3);
  }
}

TEST(SpectralGap, QuarticTwoSitesAgainstWittenLaplacian) {
  const auto pot = Potential::quartic();
  for (double m : {-1.0, 0.0, 0.5}) {
    const auto r = spectral_gap_canonical(pot, std::vector<double>{0.5, -0.5}, m, 801);
    const double ref = witten_gap(pot, 0.5, -0.5, m);
    EXPECT_NEAR(r.gap, ref, 1e-3 * ref) << m;
  }
}

TEST(SpectralGap, RejectsLargeBlocks) {
  EXPECT_THROW(spectral_gap_canonical(Potential::gaussian(), std::vector<double>(4, 0.0), 0.0, 101),
               ValidationError);
}
