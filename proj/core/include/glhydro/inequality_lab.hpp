#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "glhydro/field.hpp"
#include "glhydro/potential.hpp"

namespace glhydro {

struct CramerRow {
  int K = 0;
  double sup_diff = 0.0;     ///< sup_m |psi_K - phi_K|
  double argsup = 0.0;
  double min_psi_d2 = 0.0;   ///< min_m psi_K'' (finite differences)
  double min_phi_d2 = 0.0;   ///< min_m phi_K''
};

struct CramerReport {
  std::vector<CramerRow> rows;
  double slope = 0.0;  ///< least-squares slope of log sup_diff against log K
};

/// Sweeps K over k_list (each in [2, 16]); the block for size K is the field
/// realized on a lattice of K sites.
CramerReport check_cramer(const Potential& pot, const FieldSpec& field, std::span<const int> k_list,
                          std::span<const double> m_grid, double tol, int threads = 1);

struct CaputoReport {
  std::vector<double> sigma;
  std::vector<double> ratio;  ///< s(sigma)^2 psi_c''(m(sigma))
  double C = 0.0;             ///< max over the grid of max(ratio, 1/ratio)
};

CaputoReport check_caputo(const Potential& pot, std::span<const double> sigma_grid, double tol);

/// Smooth scalar test function with its derivative.
struct Smooth1d {
  std::function<double(double)> f;
  std::function<double(double)> df;
};

struct AsymBlReport {
  double lhs = 0.0;          ///< |cov_nu(f, g)|
  double sup_ratio = 0.0;    ///< sup |g' / psi_c''|
  double l1_df = 0.0;        ///< ∫ |f'| dnu
  double factor_plus = 1.0;  ///< exp(+3 osc delta_psi), used in rhs
  double factor_minus = 1.0; ///< exp(-3 osc delta_psi), recorded only
  double rhs = 0.0;
  double ratio = 0.0;        ///< lhs / rhs (0 when rhs = 0)
};

AsymBlReport check_asym_bl(const Potential& pot, const Smooth1d& f, const Smooth1d& g, double tol);

enum class TestFunctionKind { fourier, gaussian_bump, hermite };
TestFunctionKind test_function_kind_from_name(const std::string& name);

/// Test functions on the (K-1) fiber coordinates, generated deterministically
/// from the seed. Each is made strictly positive with unit mass under the
/// fiber measure by f -> (r - min r + range/2) / ∫(...) dmu, an idempotent map.
struct TestFunctionFamily {
  TestFunctionKind kind = TestFunctionKind::fourier;
  int count = 20;
  std::uint64_t seed = 1;
};

struct CovarianceRow {
  int index = 0;
  double lhs = 0.0;    ///< |cov(f, (1/K) sum psi'(x_i))|
  double rhs = 0.0;    ///< ∫ sum_{i<K} |df/dx_i|^2 / f dmu
  double ratio = 0.0;  ///< lhs^2 / (K rhs), 0 when both vanish
};

struct CovarianceReport {
  int K = 0;
  double m = 0.0;
  std::vector<CovarianceRow> rows;
  double worst_ratio = 0.0;  ///< empirical C0 candidate
  double mass_error = 0.0;   ///< max |∫ f dmu - 1| after normalization
};

/// Dense fiber quadrature for K in {2, 3}; grid_size nodes per coordinate.
CovarianceReport check_covariance_estimate(const Potential& pot, std::span<const double> block,
                                           double m, const TestFunctionFamily& family, double tol,
                                           int grid_size = 0);

/// Same ratio for an explicit raw test function given on fiber coordinates
/// (values and gradient at each point). Normalization is applied internally.
struct FiberFunction {
  std::function<double(std::span<const double>)> f;
  std::function<void(std::span<const double>, std::span<double>)> grad;
};
CovarianceRow covariance_ratio(const Potential& pot, std::span<const double> block, double m,
                               const FiberFunction& fn, double tol, int grid_size = 0);

struct GapResult {
  double gap = 0.0;
  double half_width = 0.0;  ///< final box half-width in orthonormal fiber coordinates
  int nodes_per_axis = 0;
  int box_iterations = 0;
};

/// Smallest nonzero eigenvalue of the finite-volume generator of the Dirichlet
/// form ∫ |grad_fiber F|^2 dmu_{K,a,m} (intrinsic gradient on the hyperplane,
/// orthonormal coordinates). The box grows until the gap changes by < 1%;
/// the node spacing is fixed by grid_size at the initial box.
GapResult spectral_gap_canonical(const Potential& pot, std::span<const double> block, double m,
                                 int grid_size);

}  // namespace glhydro
