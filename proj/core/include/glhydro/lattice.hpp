#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace glhydro {

/// Configuration on the fiber X_{N,m}: N spins with mean m.
struct MicroState {
  double mean = 0.0;
  std::vector<double> x;

  static MicroState from_values(std::vector<double> x);
  int n() const noexcept { return static_cast<int>(x.size()); }
  /// Throws ValidationError when the stored mean disagrees with the values by more than 1e-9.
  void validate() const;
};

/// Macroscopic profile on Y_{M,m}, inner product (1/M) sum y_i z_i.
struct MacroProfile {
  double mean = 0.0;
  std::vector<double> y;

  static MacroProfile from_values(std::vector<double> y);
  int m_blocks() const noexcept { return static_cast<int>(y.size()); }
  void validate() const;
};

double mean_of(std::span<const double> v);
/// Subtracts the mean in place.
void center(std::span<double> v);

/// Block averages of K consecutive sites.
std::vector<double> project_P(std::span<const double> x, int K);
MacroProfile project_P(const MicroState& x, int K);
/// Blockwise-constant embedding NP^t: every site of block i gets y_i.
std::vector<double> lift_Pt(std::span<const double> y, int K);
MicroState lift_Pt(const MacroProfile& y, int K);

/// (Ax)_i = N^2 (2x_i - x_{i-1} - x_{i+1}), periodic.
std::vector<double> apply_A(std::span<const double> x);
/// Eigenvalues 4N^2 sin^2(pi k / N) for k = 0..N/2 (the distinct ones).
std::vector<double> a_eigenvalues(int n);
/// Mean-zero solution of Ax = b for mean-zero b, by cumulative sums.
std::vector<double> solve_A(std::span<const double> b);

/// Multiplies the Fourier coefficient of mode k (k = 0..N/2) by mult[k]; the
/// operator is a real symmetric circulant function of A.
std::vector<double> spectral_multiply(std::span<const double> x, std::span<const double> mult);
/// sqrt(2A) xi through the circulant spectral decomposition.
std::vector<double> sqrt2A_mul(std::span<const double> xi);

/// The macroscopic mobility A-bar on the mean-zero subspace of Y_M, built from
/// A-bar^{-1} = P A^{-1} N P^t for lattice size N.
class AbarOperator {
 public:
  AbarOperator(int n, int m);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  const Eigen::MatrixXd& matrix() const noexcept { return abar_; }
  const Eigen::MatrixXd& inverse_matrix() const noexcept { return abar_inv_; }

  /// A-bar v for mean-zero v.
  std::vector<double> apply(std::span<const double> v) const;
  /// A-bar^{-1} w for mean-zero w.
  std::vector<double> apply_inverse(std::span<const double> w) const;

 private:
  void check(std::span<const double> v) const;

  int n_;
  int m_;
  Eigen::MatrixXd abar_;
  Eigen::MatrixXd abar_inv_;
};

/// Cached operator per (N, M); construction is synchronized, reads are lock-free.
std::shared_ptr<const AbarOperator> abar_operator(int n, int m);
std::vector<double> abar_apply(int m, int n, std::span<const double> v);

/// (1/N) <A^{-1} x, x> through the primitive F with x_i = N (F_{i+1} - F_i), sum F = 0.
double hminus1_sq_discrete(std::span<const double> x);
/// Exact H^{-1} norm squared of the zero-mean step function with the given cell values
/// on the unit torus (uniform cells).
double hminus1_sq_step(std::span<const double> values);
/// Repeats every cell value `factor` times.
std::vector<double> refine_step(std::span<const double> values, int factor);
/// H^{-1} squared distance between two step functions on uniform grids whose
/// sizes divide each other, evaluated on the finer grid.
double hminus1_sq_step_distance(std::span<const double> a, std::span<const double> b);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Theta: Monte-Carlo average of (1/2N) <A^{-1}(x - NP^t eta), x - NP^t eta>.
MeanEstimate theta(std::span<const MicroState> samples, const MacroProfile& eta, int K);
/// Single-sample Theta integrand.
double theta_sample(std::span<const double> x, std::span<const double> eta, int K);

/// Fluctuation projection (id - NP^t P) x.
std::vector<double> fluctuation(std::span<const double> x, int K);

/// Smallest gamma with |Qx|^2 <= (gamma/M^2) <Ax,x> and <A^{-1}Qx,Qx> <= (gamma/M^2)|x|^2
/// on mean-zero x, Q the fluctuation projection. Both ratios share the
/// top eigenvalue of Q A^{-1} Q, found by power iteration.
double fluctuation_poincare_gamma(int n, int m, int max_iter = 5000, double rtol = 1e-10);

}  // namespace glhydro
