#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "glhydro/errors.hpp"
#include "glhydro/lattice.hpp"
#include "glhydro/rng.hpp"

using namespace glhydro;

namespace {

Eigen::MatrixXd dense_A(int n) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) += 2.0 * n * n;
    A(i, (i + 1) % n) -= 1.0 * n * n;
    A(i, (i + n - 1) % n) -= 1.0 * n * n;
  }
  return A;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& M) {
  return M.completeOrthogonalDecomposition().pseudoInverse();
}

std::vector<double> random_mean_zero(int n, std::uint64_t seed) {
  CounterStream rng(seed, n);
  std::vector<double> v(n);
  rng.fill_normal(v);
  center(v);
  return v;
}

Eigen::VectorXd as_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST(Lattice, PNPtIsIdentity) {
  const std::vector<double> y{0.3, -1.2, 4.0, 0.0};
  for (int K : {1, 3, 8}) {
    const auto back = project_P(lift_Pt(y, K), K);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(back[i], y[i], 1e-12);
  }
}

TEST(Lattice, AKillsConstants) {
  const std::vector<double> c(32, 1.7);
  for (double v : apply_A(c)) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(Lattice, EigenvaluesMatchDenseSpectrum) {
  const int n = 8;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_A(n));
  std::vector<double> expected;
  for (int k = 0; k < n; ++k) expected.push_back(4.0 * n * n * std::pow(std::sin(std::numbers::pi * k / n), 2));
  std::sort(expected.begin(), expected.end());
  for (int k = 0; k < n; ++k) EXPECT_NEAR(es.eigenvalues()[k], expected[k], 1e-9);
  const auto lam = a_eigenvalues(n);
  for (int k = 0; k <= n / 2; ++k) {
    EXPECT_NEAR(lam[k], 4.0 * n * n * std::pow(std::sin(std::numbers::pi * k / n), 2), 1e-9);
  }
}

TEST(Lattice, SolveAInvertsOnMeanZero) {
  for (int n : {8, 64, 257}) {
    const auto b = random_mean_zero(n, 3);
    const auto x = solve_A(b);
    const auto back = apply_A(x);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(back[i], b[i], 1e-8 * n);
    EXPECT_NEAR(mean_of(x), 0.0, 1e-14);
    const Eigen::VectorXd ref = pinv(dense_A(n)) * as_vec(b);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-10);
  }
}

TEST(Lattice, SolveARejectsNonzeroMean) {
  std::vector<double> b(8, 1.0);
  EXPECT_THROW(solve_A(b), ValidationError);
}

TEST(Lattice, SqrtTwoASquaredIsTwoA) {
  for (int n : {16, 64, 100}) {
    const auto x = random_mean_zero(n, 5);
    const auto twice = sqrt2A_mul(sqrt2A_mul(x));
    const auto ref = apply_A(x);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(twice[i], 2.0 * ref[i], 1e-9 * n * n);
  }
}

TEST(Lattice, SpectralMultiplyByEigenvaluesIsA) {
  const int n = 32;
  const auto x = random_mean_zero(n, 8);
  const auto y = spectral_multiply(x, a_eigenvalues(n));
  const auto ref = apply_A(x);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(y[i], ref[i], 1e-8 * n * n);
}

// ||x||^2_{H^-1} = (1/N) x . A^+ x on the discrete torus.
TEST(Lattice, DiscreteHMinusOneIsAPseudoInverseForm) {
  for (int n : {8, 50, 128}) {
    const auto x = random_mean_zero(n, 11);
    const Eigen::VectorXd v = as_vec(x);
    const double ref = v.dot(pinv(dense_A(n)) * v) / n;
    EXPECT_NEAR(hminus1_sq_discrete(x), ref, 1e-10 * std::abs(ref)) << n;
  }
}

TEST(Lattice, HMinusOneSandwich) {
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 16 + 8 * (trial % 10);
    const auto x = random_mean_zero(n, 100 + trial);
    const double d = hminus1_sq_discrete(x), s = hminus1_sq_step(x);
    EXPECT_GE(d / s, 1.0);
    EXPECT_LE(d / s, 3.0);
  }
}

TEST(Lattice, StepNormIsExactIntegral) {
  // Step function +1 on [0,1/2), -1 on [1/2,1): primitive is a tent with
  // integral of square 1/12 minus squared mean 1/16.
  std::vector<double> v(8, 1.0);
  std::fill(v.begin() + 4, v.end(), -1.0);
  EXPECT_NEAR(hminus1_sq_step(v), 1.0 / 12 - 1.0 / 16, 1e-15);
  // Refinement does not change the step function, hence the norm.
  EXPECT_NEAR(hminus1_sq_step(refine_step(v, 4)), hminus1_sq_step(v), 1e-15);
}

TEST(Lattice, StepDistanceAcrossNestedGrids) {
  const auto a = random_mean_zero(16, 1);
  const auto b = random_mean_zero(64, 2);
  const auto fine = refine_step(a, 4);
  std::vector<double> diff(64);
  for (int i = 0; i < 64; ++i) diff[i] = fine[i] - b[i];
  EXPECT_NEAR(hminus1_sq_step_distance(a, b), hminus1_sq_step(diff), 1e-15);
  EXPECT_NEAR(hminus1_sq_step_distance(a, b), hminus1_sq_step_distance(b, a), 1e-15);
}

TEST(Lattice, AbarMatchesDenseConstruction) {
  const int n = 24, m = 4, K = n / m;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, n);
  for (int i = 0; i < n; ++i) P(i / K, i) = 1.0 / K;
  const Eigen::MatrixXd lift = K * P.transpose();
  const Eigen::MatrixXd inv = P * pinv(dense_A(n)) * lift;
  const Eigen::MatrixXd ref = pinv(inv);
  const auto op = abar_operator(n, m);
  EXPECT_LE((op->matrix() - ref).norm(), 1e-8 * ref.norm());
  std::vector<double> w{1.0, -2.0, 0.5, 0.5};
  const auto back = op->apply_inverse(op->apply(w));
  for (int i = 0; i < m; ++i) EXPECT_NEAR(back[i], w[i], 1e-12);
}

TEST(Lattice, AbarRequiresDivisor) { EXPECT_THROW(AbarOperator(10, 3), ValidationError); }

TEST(Lattice, GammaMatchesDenseEigenvalue) {
  const int n = 64, m = 8, K = n / m;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i / K == j / K) Q(i, j) -= 1.0 / K;
    }
  }
  const Eigen::MatrixXd B = Q * pinv(dense_A(n)) * Q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  const double ref = es.eigenvalues().maxCoeff() * m * m;
  EXPECT_NEAR(fluctuation_poincare_gamma(n, m), ref, 1e-8 * ref);
}

TEST(Lattice, GammaStableAcrossScales) {
  const double g1 = fluctuation_poincare_gamma(64, 8);
  const double g2 = fluctuation_poincare_gamma(256, 16);
  EXPECT_LE(std::max(g1, g2) / std::min(g1, g2), 2.0);
}

TEST(Lattice, FluctuationHasZeroBlockMeans) {
  const auto x = random_mean_zero(48, 4);
  for (double v : project_P(fluctuation(x, 6), 6)) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Lattice, ThetaVanishesOnLiftedProfile) {
  const std::vector<double> eta{0.5, -0.25, -0.25};
  const auto x = lift_Pt(eta, 4);
  EXPECT_NEAR(theta_sample(x, eta, 4), 0.0, 1e-15);
  auto y = x;
  y[0] += 0.1;
  y[1] -= 0.1;
  EXPECT_GT(theta_sample(y, eta, 4), 0.0);
}

TEST(Lattice, MicroStateValidation) {
  auto s = MicroState::from_values({1.0, 2.0, 3.0});
  EXPECT_NEAR(s.mean, 2.0, 1e-15);
  EXPECT_NO_THROW(s.validate());
  s.x[0] = NAN;
  EXPECT_THROW(s.validate(), ValidationError);
}
