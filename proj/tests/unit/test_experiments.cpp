#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "glhydro/errors.hpp"
#include "glhydro/experiments.hpp"
#include "glhydro/free_energy.hpp"
#include "oracles.hpp"

using namespace glhydro;

namespace {

HydroScenario small_gaussian() {
  HydroScenario sc;
  sc.n_list = {16, 64};
  sc.T = 0.05;
  sc.n_traj = 12;
  sc.checkpoints = 8;
  sc.bootstrap = 50;
  sc.fe_nodes = 21;
  return sc;
}

}  // namespace

TEST(Zeta0, ParseAndDescribe) {
  const auto z = Zeta0::parse("sine:0.25:2");
  EXPECT_EQ(z.kind, Zeta0::Kind::sine);
  EXPECT_DOUBLE_EQ(z.amplitude, 0.25);
  EXPECT_EQ(z.mode, 2);
  EXPECT_EQ(Zeta0::parse(z.describe()).describe(), z.describe());
  EXPECT_EQ(Zeta0::parse("zero").kind, Zeta0::Kind::zero);
  EXPECT_THROW(Zeta0::parse("cosine:1:1"), ValidationError);
  EXPECT_THROW(Zeta0::parse("sine:x:1"), ValidationError);
}

TEST(Zeta0, CellAverageIsExact) {
  const auto z = Zeta0::parse("sine:0.5:3");
  for (double a : {0.0, 0.13, 0.7}) {
    const double b = a + 0.07;
    const double ref = oracle::integrate([&](double t) { return z(t); }, a, b) / (b - a);
    EXPECT_NEAR(z.cell_average(a, b), ref, 1e-13);
  }
  double s = 0;
  for (double v : z.cells(64)) s += v;
  EXPECT_NEAR(s, 0.0, 1e-12);
}

TEST(Scenario, MRuleUsesDivisorsNearRootN) {
  for (int n : {16, 64, 256, 1024, 96, 100}) {
    const int m = default_m_rule(n);
    EXPECT_EQ(n % m, 0) << n;
    EXPECT_LE(std::abs(m - std::sqrt(double(n))), std::sqrt(double(n))) << n;
  }
  EXPECT_EQ(default_m_rule(64), 8);
  EXPECT_EQ(default_m_rule(256), 16);
  EXPECT_EQ(default_m_rule(1024), 32);
}

TEST(Scenario, PdeGridIsMultipleOfLatticeSizes) {
  HydroScenario sc;
  sc.n_list = {64, 256, 1024};
  EXPECT_EQ(sc.resolved_pde_grid(), 1024);
  sc.n_list = {48, 64};
  const int g = sc.resolved_pde_grid();
  EXPECT_EQ(g % 192, 0);
  EXPECT_GE(g, 512);
}

TEST(Scenario, ValidationRejectsBadInput) {
  HydroScenario sc;
  sc.n_list = {64};
  sc.m_list = {7};
  EXPECT_THROW(sc.validate(), ValidationError);
  sc.m_list = {};
  sc.T = -1;
  EXPECT_THROW(sc.validate(), ValidationError);
  sc.T = 0.1;
  sc.n_traj = 0;
  EXPECT_THROW(sc.validate(), ValidationError);
}

TEST(LogLogSlope, RecoversPowerLaw) {
  const std::vector<double> n{64, 256, 1024};
  std::vector<double> d;
  for (double v : n) d.push_back(3.0 * std::pow(v, -0.75));
  EXPECT_NEAR(loglog_slope(n, d), -0.75, 1e-12);
}

TEST(HydroConvergence, DeterministicAndThreadIndependent) {
  auto sc = small_gaussian();
  const auto a = run_hydro_convergence(sc);
  sc.threads = 2;
  const auto b = run_hydro_convergence(sc);
  ASSERT_EQ(a.entries.size(), 2u);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    ASSERT_FALSE(a.entries[i].failed) << a.entries[i].error;
    EXPECT_EQ(a.entries[i].D, b.entries[i].D);
    ASSERT_EQ(a.entries[i].series.size(), 8u);
    for (std::size_t k = 0; k < a.entries[i].series.size(); ++k) {
      EXPECT_EQ(a.entries[i].series[k].theta.mean, b.entries[i].series[k].theta.mean);
    }
  }
  ASSERT_EQ(a.rates.size(), 1u);
  EXPECT_TRUE(a.rates[0].strictly_decreasing);
  EXPECT_LE(a.rates[0].ci_low, a.rates[0].slope);
  EXPECT_GE(a.rates[0].ci_high, a.rates[0].slope);
  EXPECT_TRUE(a.pde_lyapunov_pass);
  EXPECT_NEAR(a.pde_mass_drift, 0.0, 1e-12);
}

TEST(HydroConvergence, CheckpointsSpanHorizon) {
  const auto rec = run_hydro_convergence(small_gaussian());
  ASSERT_EQ(rec.checkpoints.size(), 8u);
  EXPECT_EQ(rec.checkpoints.front(), 0.0);
  EXPECT_NEAR(rec.checkpoints.back(), 0.05, 1e-15);
}

TEST(BoundAudit, GaussianBoundHolds) {
  auto sc = small_gaussian();
  sc.n_list = {64};
  const auto rec = run_theorem_bound_audit(sc);
  ASSERT_EQ(rec.entries.size(), 1u);
  const auto& e = rec.entries[0];
  ASSERT_FALSE(e.failed) << e.error;
  EXPECT_EQ(e.m, 8);
  EXPECT_EQ(e.K, 8);
  EXPECT_TRUE(e.bound.holds);
  EXPECT_GT(e.bound.gamma, 0.0);
  EXPECT_NEAR(e.bound.rho, 1.0, 1e-4);
  EXPECT_NEAR(e.bound.C0, 0.0, 1e-12);
  EXPECT_TRUE(e.ode_lyapunov_pass);
  EXPECT_NEAR(e.bound.total,
              e.bound.theta0 + e.bound.tm_over_n + e.bound.covariance_term + e.bound.fluctuation_term,
              1e-12 * e.bound.total);
}

TEST(BoundAudit, ExactInitialDataStartsAtZeroTheta) {
  auto sc = small_gaussian();
  sc.n_list = {64};
  sc.exact_initial = true;
  const auto rec = run_theorem_bound_audit(sc);
  EXPECT_NEAR(rec.entries[0].series.front().theta.mean, 0.0, 1e-15);
}

TEST(FreeEnergyConvergence, ZeroFieldIsExact) {
  const double tol = 1e-9;
  const auto rep = run_free_energy_convergence(Potential::quartic(), FieldSpec::zero(), {4, 16},
                                               uniform_grid(-2, 2, 9), 1, 1, tol);
  EXPECT_LE(rep.max_sup_diff, 2 * tol);
}
