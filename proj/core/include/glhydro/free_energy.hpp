#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "glhydro/field.hpp"
#include "glhydro/potential.hpp"
#include "glhydro/quadrature.hpp"

namespace glhydro {

/// Field values entering a Legendre solve, deduplicated and weighted. A block
/// (a_1..a_K) gets weights count/K; a field law gets its atom probabilities.
struct WeightedShifts {
  std::vector<double> a;
  std::vector<double> w;
  std::vector<int> count;  ///< multiplicities for blocks; empty for laws
  int total = 0;           ///< K for blocks, 0 for laws
};

WeightedShifts block_shifts(std::span<const double> block);
WeightedShifts law_shifts(const FieldSpec& spec);

/// phi*(sigma), mean and variance of mu_sigma.
TiltMoments log_partition_1d(const Potential& pot, double sigma, double tol);

/// Conjugate sum phi_K*(sigma) = sum_j w_j phi*(sigma - a_j) with its first two derivatives.
Eval3 conjugate_sum(const Potential& pot, const WeightedShifts& shifts, double sigma, double tol);

/// Solves sum_j w_j m(sigma - a_j) = m for sigma.
double sigma_of_m(const Potential& pot, const WeightedShifts& shifts, double m, double tol);
double sigma_of_m(const Potential& pot, std::span<const double> block, double m, double tol);

/// Legendre transform of the conjugate sum: value, derivative sigma, and
/// second derivative 1 / sum_j w_j s(sigma - a_j)^2.
Eval3 legendre(const Potential& pot, const WeightedShifts& shifts, double m, double tol);

Eval3 phi_K(const Potential& pot, std::span<const double> block, double m, double tol);
Eval3 phi_tilde(const Potential& pot, const FieldSpec& spec, double m, double tol);

/// Density at 0 of K^{-1/2} sum_i (X_i - m_i), X_i ~ mu_{sigma - a_i}, by Fourier inversion.
double g_density(const Potential& pot, std::span<const double> block, double m, double tol);

/// psi_K = phi_K - (1/K) log g_density.
double psi_K(const Potential& pot, std::span<const double> block, double m, double tol);

/// psi_K by direct nested quadrature over the hyperplane {mean = m} with
/// Hausdorff measure; 2 <= K <= 4.
double psi_K_direct(const Potential& pot, std::span<const double> block, double m, double tol);

/// Maximizer of the fiber density exp(-sum_i (psi(x_i) + a_i x_i)) on {sum x_i = total}.
std::vector<double> constrained_mode(const Potential& pot, std::span<const double> a, double total);

enum class FreeEnergyKind { phi_K, psi_K, phi_tilde };
std::string free_energy_kind_name(FreeEnergyKind kind);

/// Tabulated free energy with C^1 Hermite interpolation of the value and a
/// monotone (Fritsch-Carlson limited) cubic interpolation of the derivative, so
/// the interpolated derivative is nondecreasing whenever the nodes are.
class FreeEnergyModel {
 public:
  FreeEnergyModel(FreeEnergyKind kind, std::vector<double> block, std::vector<double> grid,
                  std::vector<double> values, std::vector<double> d1, std::vector<double> d2);

  FreeEnergyKind kind() const noexcept { return kind_; }
  /// Block size; 0 for phi_tilde.
  int K() const noexcept { return static_cast<int>(block_.size()); }
  std::span<const double> block_field() const noexcept { return block_; }
  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> d1() const noexcept { return d1_; }
  std::span<const double> d2() const noexcept { return d2_; }

  bool covers(double m) const noexcept { return m >= grid_.front() && m <= grid_.back(); }
  /// Interpolated (value, d1, d2); throws DomainError outside the grid.
  Eval3 operator()(double m) const;
  double derivative(double m) const;
  double min_d2() const;
  double max_d2() const;

  void write_csv(const std::filesystem::path& path) const;

 private:
  std::size_t locate(double m) const;

  FreeEnergyKind kind_;
  std::vector<double> block_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> d1_;
  std::vector<double> d2_;
  std::vector<double> slope_;  ///< limited slopes of the d1 interpolant
  bool uniform_ = false;
  double inv_h_ = 0.0;
};

/// Tabulates phi_K or psi_K for one block. Needs >= 4 strictly increasing nodes.
FreeEnergyModel tabulate(const Potential& pot, std::span<const double> block, FreeEnergyKind kind,
                         std::span<const double> grid, double tol, int threads = 1);

/// Tabulates phi_tilde for a field law.
FreeEnergyModel tabulate_phi_tilde(const Potential& pot, const FieldSpec& spec,
                                   std::span<const double> grid, double tol, int threads = 1);

/// Uniform grid helper: n nodes from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

}  // namespace glhydro
