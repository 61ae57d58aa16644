#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "glhydro/free_energy.hpp"
#include "glhydro/lattice.hpp"
#include "glhydro/potential.hpp"
#include "glhydro/quadrature.hpp"
#include "glhydro/rng.hpp"

namespace glhydro {

/// Component i is psi'(x_i) + a_i.
std::vector<double> grad_H(const Potential& pot, std::span<const double> field,
                           std::span<const double> x);
/// sum_i psi(x_i) + a_i x_i (without log Z).
double hamiltonian(const Potential& pot, std::span<const double> field, std::span<const double> x);

/// Largest explicit step allowed by dt <= guard / (4 N^2 max_i psi''(x_i)).
double stable_dt(const Potential& pot, std::span<const double> x, double guard = 0.5);

/// One Euler-Maruyama step x <- x - A grad H dt + sqrt(dt) sqrt(2A) xi. Passing a
/// null noise stream gives the deterministic drift step. Throws IntegrationError
/// if any component exceeds 1e6 in magnitude.
void kawasaki_step(MicroState& state, const Potential& pot, std::span<const double> field,
                   double dt, CounterStream* noise, std::size_t step_index = 0);

/// Exact transition of the Kawasaki SDE over dt when psi = c x^2 / 2: every
/// Fourier mode of x - x* is an Ornstein-Uhlenbeck process with rate c lambda_k,
/// where x* = m - (a - mean a) / c is the fixed point on the fiber.
class OuPropagator {
 public:
  OuPropagator(const Potential& pot, std::span<const double> field, double mean, double dt);

  double dt() const noexcept { return dt_; }
  void step(MicroState& state, CounterStream* noise) const;

 private:
  double dt_;
  std::vector<double> fixed_point_;
  std::vector<double> decay_;
  std::vector<double> noise_scale_;
};

struct SdeConfig {
  double dt = 1e-5;          ///< upper bound on the explicit step
  double t_end = 0.1;        ///< horizon T
  int n_traj = 16;
  std::uint64_t seed = 1;
  int record_every = 64;     ///< steps between stability-guard re-evaluations
  double cfl_guard = 0.5;
};

/// Advances one trajectory from t0 to t1 by Euler-Maruyama with the adaptive
/// guard (or exactly when the potential is quadratic). Returns the step count.
std::size_t advance(MicroState& state, const Potential& pot, std::span<const double> field,
                    double t0, double t1, const SdeConfig& cfg, CounterStream& noise);

/// Product of exponential tilts with block means matching a macroscopic profile,
/// shifted onto the fiber. Tilts are precomputed once and shared by all draws.
class InitialSampler {
 public:
  InitialSampler(const Potential& pot, std::span<const double> field, std::span<const double> eta0,
                 double tol);

  int n() const noexcept { return static_cast<int>(sites_.size()); }
  int K() const noexcept { return K_; }
  double mean() const noexcept { return mean_; }
  std::span<const double> sigmas() const noexcept { return sigma_; }
  /// Relative entropy of the product tilt with respect to the grand canonical
  /// product measure: sum_j sigma_i m_j - phi*(sigma_i - a_j) + phi*(-a_j).
  double entropy() const noexcept { return entropy_; }

  MicroState sample(CounterStream& rng) const;

 private:
  struct Site {
    int tilt = -1;       ///< index into tilts_, or -1 for the Gaussian closed form
    double loc = 0.0;    ///< Gaussian mean
    double scale = 1.0;  ///< Gaussian standard deviation
  };
  int K_ = 1;
  double mean_ = 0.0;
  std::vector<double> sigma_;
  std::vector<Site> sites_;
  std::vector<DiscreteTilt> tilts_;
  double entropy_ = 0.0;
};

struct InitialSample {
  MicroState state;
  double entropy = 0.0;
};

InitialSample sample_initial(const MacroProfile& eta0, const Potential& pot,
                             std::span<const double> field, CounterStream& rng, double tol = 1e-10);

/// Coarse-grained ODE d eta/dt = -A-bar grad_Y H-bar(eta), with grad_Y H-bar the
/// vector psi_{K,i}'(eta_i) minus its average.
class MacroOde {
 public:
  MacroOde(int n, std::vector<FreeEnergyModel> blocks);

  int m() const noexcept { return static_cast<int>(blocks_.size()); }
  int n() const noexcept { return n_; }
  const std::vector<FreeEnergyModel>& blocks() const noexcept { return blocks_; }

  std::vector<double> velocity(std::span<const double> eta) const;
  /// H-bar(eta) = (1/M) sum_i psi_{K,i}(eta_i).
  double energy(std::span<const double> eta) const;
  /// One classical RK4 step; the mean is conserved exactly.
  MacroProfile step(const MacroProfile& eta, double dt) const;

 private:
  int n_;
  std::vector<FreeEnergyModel> blocks_;
  std::shared_ptr<const AbarOperator> abar_;
};

MacroProfile macro_ode_step(const MacroProfile& eta, const MacroOde& ode, double dt);

/// Cell averages of zeta on a uniform periodic grid with g cells.
struct PdeGrid {
  std::vector<double> values;
  int g() const noexcept { return static_cast<int>(values.size()); }
  double dtheta() const noexcept { return 1.0 / static_cast<double>(values.size()); }
  double mass() const;
};

/// dt <= dtheta^2 / (2 max phi~'') over the current values.
double pde_max_dt(const PdeGrid& grid, const FreeEnergyModel& fe);
/// Conservative explicit update; throws CflError above pde_max_dt.
PdeGrid hydro_pde_step(const PdeGrid& grid, const FreeEnergyModel& fe, double dt);
/// Integrates from t0 to t1 with steps at `safety` times the stability limit.
void hydro_pde_advance(PdeGrid& grid, const FreeEnergyModel& fe, double t0, double t1,
                       double safety = 0.9);
/// Integral of phi~(zeta) over the torus.
double pde_energy(const PdeGrid& grid, const FreeEnergyModel& fe);

struct LyapunovReport {
  double initial = 0.0;
  double max_increment = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Pass iff every increment is at most 1e-8 (|initial| + 1).
LyapunovReport lyapunov_audit(std::span<const double> energies);

}  // namespace glhydro
