#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <numbers>

#include "glhydro/dynamics.hpp"
#include "glhydro/errors.hpp"
#include "glhydro/free_energy.hpp"

using namespace glhydro;

namespace {

std::vector<double> cosine_mode(int n, int k, double amp = 1.0) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = amp * std::cos(2 * std::numbers::pi * k * i / n);
  return x;
}

MacroOde gaussian_ode(int n, int m) {
  const auto pot = Potential::gaussian();
  std::vector<FreeEnergyModel> blocks;
  const std::vector<double> zero(n / m, 0.0);
  const auto grid = uniform_grid(-3, 3, 61);
  for (int j = 0; j < m; ++j) blocks.push_back(tabulate(pot, zero, FreeEnergyKind::psi_K, grid, 1e-11));
  return MacroOde(n, std::move(blocks));
}

}  // namespace

TEST(Kawasaki, EigenmodeDecayWithoutNoise) {
  const auto pot = Potential::gaussian();
  const int n = 32;
  const std::vector<double> field(n, 0.0);
  for (int k : {1, 3, 7}) {
    auto s = MicroState::from_values(cosine_mode(n, k));
    const double lam = 4.0 * n * n * std::pow(std::sin(std::numbers::pi * k / n), 2);
    const double dt = stable_dt(pot, s.x);
    const int steps = 50;
    for (int i = 0; i < steps; ++i) kawasaki_step(s, pot, field, dt, nullptr, i);
    const double factor = std::pow(1.0 - lam * dt, steps);
    const auto ref = cosine_mode(n, k, factor);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(s.x[i], ref[i], 1e-6);
  }
}

TEST(Kawasaki, MeanConservedWithNoise) {
  const auto pot = Potential::quartic();
  const int n = 64;
  const auto field = realize_field(FieldSpec::two_point(0.5, 1), n).values;
  auto s = MicroState::from_values(cosine_mode(n, 2));
  s.mean = 0.3;
  for (double& v : s.x) v += 0.3;
  CounterStream rng(1, 0);
  for (int i = 0; i < 200; ++i) {
    kawasaki_step(s, pot, field, stable_dt(pot, s.x), &rng, i);
    EXPECT_NEAR(mean_of(s.x), 0.3, 1e-12);
  }
}

TEST(Kawasaki, GradientMatchesHamiltonian) {
  const auto pot = Potential::perturbed_quartic(0.1);
  const int n = 16;
  const auto field = realize_field(FieldSpec::uniform(0.5, 2), n).values;
  auto x = cosine_mode(n, 1, 0.7);
  const auto g = grad_H(pot, field, x);
  for (int i = 0; i < n; ++i) {
    auto p = x, m = x;
    p[i] += 1e-6;
    m[i] -= 1e-6;
    EXPECT_NEAR(g[i], (hamiltonian(pot, field, p) - hamiltonian(pot, field, m)) / 2e-6, 1e-6);
  }
}

TEST(Kawasaki, ExplosionIsReported) {
  const auto pot = Potential::quartic();
  const int n = 16;
  const std::vector<double> field(n, 0.0);
  auto s = MicroState::from_values(cosine_mode(n, 1, 3.0));
  EXPECT_THROW(
      for (int i = 0; i < 50; ++i) kawasaki_step(s, pot, field, 1.0, nullptr, i), IntegrationError);
}

TEST(OuPropagator, ModesDecayExponentially) {
  const auto pot = Potential::gaussian();
  const int n = 32, k = 2;
  const std::vector<double> field(n, 0.0);
  auto s = MicroState::from_values(cosine_mode(n, k));
  const double dt = 1e-3;
  OuPropagator(pot, field, 0.0, dt).step(s, nullptr);
  const double lam = 4.0 * n * n * std::pow(std::sin(std::numbers::pi * k / n), 2);
  const auto ref = cosine_mode(n, k, std::exp(-lam * dt));
  for (int i = 0; i < n; ++i) EXPECT_NEAR(s.x[i], ref[i], 1e-12);
}

// The stationary law of the Gaussian ensemble is iid N(-a_i + abar, 1) conditioned on the mean.
TEST(OuPropagator, ReachesCanonicalEnsemble) {
  const auto pot = Potential::gaussian();
  const int n = 16, samples = 4000;
  const std::vector<double> field(n, 0.0);
  const OuPropagator prop(pot, field, 0.0, 10.0);
  double var = 0.0;
  for (int s = 0; s < samples; ++s) {
    CounterStream rng(3, s);
    auto st = MicroState::from_values(std::vector<double>(n, 0.0));
    prop.step(st, &rng);
    for (double v : st.x) var += v * v;
  }
  var /= double(samples) * n;
  EXPECT_NEAR(var, 1.0 - 1.0 / n, 0.03);
}

TEST(Advance, QuarticAdvanceStaysFiniteAndConservative) {
  const auto pot = Potential::quartic();
  const int n = 32;
  const auto field = realize_field(FieldSpec::two_point(0.5, 1), n).values;
  auto s = MicroState::from_values(cosine_mode(n, 1, 0.5));
  SdeConfig cfg;
  cfg.dt = 1e-4;
  CounterStream rng(5, 1);
  const auto steps = advance(s, pot, field, 0.0, 0.01, cfg, rng);
  EXPECT_GT(steps, 0u);
  EXPECT_NO_THROW(s.validate());
  EXPECT_NEAR(mean_of(s.x), 0.0, 1e-12);
}

TEST(InitialSampler, FlatProfileHasZeroEntropy) {
  const auto pot = Potential::gaussian();
  const std::vector<double> field(16, 0.0), eta(4, 0.0);
  const InitialSampler sampler(pot, field, eta, 1e-10);
  EXPECT_NEAR(sampler.entropy(), 0.0, 1e-9);
}

TEST(InitialSampler, BlockMeansFollowProfile) {
  for (const auto& pot : {Potential::gaussian(), Potential::quartic()}) {
    const int n = 32, m = 4, samples = 2000;
    const auto field = realize_field(FieldSpec::two_point(0.5, 2), n).values;
    const std::vector<double> eta{0.5, -0.5, 0.25, -0.25};
    const InitialSampler sampler(pot, field, eta, 1e-10);
    EXPECT_GT(sampler.entropy(), 0.0);
    std::vector<double> avg(m, 0.0);
    for (int s = 0; s < samples; ++s) {
      CounterStream rng(9, s);
      const auto st = sampler.sample(rng);
      EXPECT_NEAR(mean_of(st.x), 0.0, 1e-12);
      const auto y = project_P(st.x, n / m);
      for (int j = 0; j < m; ++j) avg[j] += y[j] / samples;
    }
    for (int j = 0; j < m; ++j) EXPECT_NEAR(avg[j], eta[j], 0.03) << pot.name();
  }
}

TEST(MacroOde, MatchesMatrixExponential) {
  const int n = 64, m = 8;
  const auto ode = gaussian_ode(n, m);
  MacroProfile eta;
  for (int j = 0; j < m; ++j) eta.y.push_back(0.5 * std::sin(2 * std::numbers::pi * (j + 0.5) / m));
  eta.mean = mean_of(eta.y);
  const Eigen::MatrixXd Abar = abar_operator(n, m)->matrix();
  const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(eta.y.data(), m);
  const double T = 0.02, dt = 1e-5;
  auto cur = eta;
  const int steps = static_cast<int>(std::lround(T / dt));
  for (int i = 0; i < steps; ++i) cur = ode.step(cur, dt);
  const Eigen::VectorXd ref = (-Abar * T).exp() * y0;
  for (int j = 0; j < m; ++j) EXPECT_NEAR(cur.y[j], ref[j], 1e-6);
}

TEST(MacroOde, EnergyNonincreasingForQuartic) {
  const auto pot = Potential::quartic();
  const int n = 64, m = 8, K = n / m;
  const auto field = realize_field(FieldSpec::two_point(0.5, 4), n).values;
  std::vector<FreeEnergyModel> blocks;
  for (int j = 0; j < m; ++j) {
    std::vector<double> block(field.begin() + j * K, field.begin() + (j + 1) * K);
    blocks.push_back(tabulate(pot, block, FreeEnergyKind::psi_K, uniform_grid(-1.5, 1.5, 31), 1e-10));
  }
  const MacroOde ode(n, std::move(blocks));
  MacroProfile eta;
  for (int j = 0; j < m; ++j) eta.y.push_back(0.6 * std::sin(2 * std::numbers::pi * (j + 0.5) / m));
  eta.mean = mean_of(eta.y);
  std::vector<double> energies{ode.energy(eta.y)};
  for (int i = 0; i < 200; ++i) {
    eta = ode.step(eta, 2e-5);
    energies.push_back(ode.energy(eta.y));
  }
  EXPECT_TRUE(lyapunov_audit(energies).pass);
  EXPECT_LT(energies.back(), energies.front());
  EXPECT_NEAR(mean_of(eta.y), eta.mean, 1e-12);
}

TEST(Pde, HeatModeDecayRate) {
  const auto fe = tabulate(Potential::gaussian(), std::vector<double>(1, 0.0), FreeEnergyKind::phi_K,
                           uniform_grid(-2, 2, 81), 1e-11);
  for (int g : {32, 64}) {
    PdeGrid grid;
    for (int j = 0; j < g; ++j) grid.values.push_back(std::sin(2 * std::numbers::pi * (j + 0.5) / g));
    const double t = 0.01;
    hydro_pde_advance(grid, fe, 0.0, t);
    const double amp = grid.values[g / 4] / std::sin(2 * std::numbers::pi * (g / 4 + 0.5) / g);
    const double rate = -std::log(amp) / t;
    const double h = 1.0 / g;
    const double exact = 4 * std::numbers::pi * std::numbers::pi;
    EXPECT_LE(std::abs(rate / exact - 1.0), 3 * std::numbers::pi * std::numbers::pi * h * h) << g;
  }
}

TEST(Pde, MassConservedAndEnergyNonincreasing) {
  const auto fe = tabulate_phi_tilde(Potential::quartic(), FieldSpec::two_point(0.5, 1),
                                     uniform_grid(-2, 2, 81), 1e-10);
  PdeGrid grid;
  const int g = 128;
  for (int j = 0; j < g; ++j) grid.values.push_back(0.8 * std::sin(2 * std::numbers::pi * (j + 0.5) / g) + 0.1);
  const double mass = grid.mass();
  std::vector<double> energies{pde_energy(grid, fe)};
  for (int k = 1; k <= 20; ++k) {
    hydro_pde_advance(grid, fe, (k - 1) * 1e-3, k * 1e-3);
    energies.push_back(pde_energy(grid, fe));
  }
  EXPECT_NEAR(grid.mass(), mass, 1e-12);
  EXPECT_TRUE(lyapunov_audit(energies).pass);
}

TEST(Pde, StepAboveCflIsRejected) {
  const auto fe = tabulate(Potential::gaussian(), std::vector<double>(1, 0.0), FreeEnergyKind::phi_K,
                           uniform_grid(-2, 2, 41), 1e-10);
  PdeGrid grid;
  grid.values.assign(16, 0.0);
  grid.values[3] = 1.0;
  EXPECT_THROW(hydro_pde_step(grid, fe, 10 * pde_max_dt(grid, fe)), CflError);
}

TEST(Lyapunov, DetectsIncrease) {
  const std::vector<double> down{3.0, 2.0, 2.0, 1.0};
  const std::vector<double> up{3.0, 2.0, 2.5};
  EXPECT_TRUE(lyapunov_audit(down).pass);
  EXPECT_FALSE(lyapunov_audit(up).pass);
  EXPECT_NEAR(lyapunov_audit(up).max_increment, 0.5, 1e-15);
}
