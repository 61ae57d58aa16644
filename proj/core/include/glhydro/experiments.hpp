#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glhydro/field.hpp"
#include "glhydro/lattice.hpp"
#include "glhydro/potential.hpp"

namespace glhydro {

/// Initial hydrodynamic profile: zero, or amplitude * sin(2 pi mode theta).
struct Zeta0 {
  enum class Kind { zero, sine };
  Kind kind = Kind::sine;
  double amplitude = 0.5;
  int mode = 1;

  /// "zero" or "sine:AMP:MODE" (AMP and MODE optional).
  static Zeta0 parse(const std::string& text);
  std::string describe() const;
  double operator()(double theta) const;
  /// Exact average over [a, b].
  double cell_average(double a, double b) const;
  /// Cell averages on a uniform grid of n cells.
  std::vector<double> cells(int n) const;
};

/// ceil(sqrt(N)) moved to the nearest divisor of N (the larger one on ties).
int default_m_rule(int n);

struct HydroScenario {
  std::string name = "scenario";
  std::vector<int> n_list{64, 256, 1024};
  std::vector<int> m_list;  ///< empty: default_m_rule for every N
  Potential pot = Potential::gaussian();
  FieldSpec field = FieldSpec::zero();
  Zeta0 zeta0;
  double T = 0.25;
  int n_traj = 200;
  int pde_grid = 0;  ///< 0: the smallest multiple of lcm(n_list) that is >= 512
  std::vector<std::uint64_t> field_seeds{1};
  std::uint64_t seed = 1;
  int checkpoints = 32;
  double sde_dt = 1e-4;  ///< cap on the explicit step (non-quadratic potentials)
  double tol = 1e-9;
  int fe_nodes = 41;
  int bootstrap = 200;
  int threads = 1;
  bool exact_initial = false;  ///< start every trajectory on NP^t eta0 (no fluctuation)

  int m_for(std::size_t index) const;
  int resolved_pde_grid() const;
  /// Throws ValidationError on inconsistent sizes or parameters.
  void validate() const;
  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct SeriesPoint {
  int n = 0;
  std::uint64_t field_seed = 0;
  double t = 0.0;
  MeanEstimate theta;
  MeanEstimate hminus1;         ///< ||x-bar - zeta(t)||^2_{H^-1}
  MeanEstimate macro_mismatch;  ///< |Px - eta(t)|_Y^2
  MeanEstimate moment;          ///< (1/N)|x|^2
  double eta_energy = 0.0;      ///< H-bar(eta(t))
};

/// Computable right-hand side of the two-scale bound with the stand-ins used.
struct BoundTerms {
  double theta0 = 0.0;
  double tm_over_n = 0.0;
  double covariance_term = 0.0;   ///< gamma C0 C1 K / (2 lambda M^2)
  double fluctuation_term = 0.0;  ///< gamma^{1/2}/M (2 alpha + 2 C1/rho)^{1/2} (C1 + C2 + beta)^{1/2}
  double total = 0.0;
  double sup_theta = 0.0;
  double sup_theta_stderr = 0.0;
  bool holds = false;
  double gamma = 0.0, C0 = 0.0, C1 = 0.0, C2 = 0.0, beta = 0.0, alpha = 0.0, lambda = 0.0,
         rho = 0.0;
};

struct NEntry {
  int n = 0;
  int m = 0;
  int K = 0;
  std::uint64_t field_seed = 0;
  bool failed = false;
  std::string error;
  double D = 0.0;  ///< sup over checkpoints of the mean H^{-1} distance
  double D_stderr = 0.0;
  double sup_theta = 0.0;
  BoundTerms bound;
  bool ode_lyapunov_pass = true;
  double ode_lyapunov_max_increment = 0.0;
  std::vector<SeriesPoint> series;
  /// Per-trajectory H^{-1} distances, [traj][checkpoint]; used for bootstrap.
  std::vector<std::vector<double>> traj_hminus1;
  double wall_seconds = 0.0;
};

struct RateFit {
  std::string name;
  std::uint64_t field_seed = 0;
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<int> n;
  std::vector<double> value;
  bool strictly_decreasing = false;
};

struct RunRecord {
  std::string run_id;
  std::string kind;  ///< "bound_audit" or "hydro_convergence"
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::uint64_t> seeds;
  std::vector<double> checkpoints;
  std::vector<NEntry> entries;
  std::vector<RateFit> rates;
  int pde_grid = 0;
  bool pde_lyapunov_pass = true;
  double pde_lyapunov_max_increment = 0.0;
  double pde_mass_drift = 0.0;
  double wall_seconds = 0.0;
};

RunRecord run_theorem_bound_audit(const HydroScenario& scenario);
RunRecord run_hydro_convergence(const HydroScenario& scenario);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct FreeEnergyConvergenceRow {
  int K = 0;
  std::vector<double> sup_diff;  ///< per draw: sup_m |phi_K - phi~|
  double mean_sup_diff = 0.0;
  std::vector<double> mean_phi;  ///< per m: draw average of phi_K
  std::vector<double> stderr_phi;
  double min_margin = 0.0;  ///< min_m (mean - phi~ + 3 stderr)
};

struct FreeEnergyConvergenceReport {
  std::vector<double> m_grid;
  std::vector<double> phi_tilde;
  std::vector<FreeEnergyConvergenceRow> rows;
  bool decreasing = false;     ///< draw-averaged sup difference strictly decreasing in K
  bool subadditive = false;    ///< every margin >= 0
  double max_sup_diff = 0.0;
};

FreeEnergyConvergenceReport run_free_energy_convergence(const Potential& pot, const FieldSpec& field,
                                                        const std::vector<int>& k_list,
                                                        const std::vector<double>& m_grid,
                                                        int n_field_draws, std::uint64_t seed,
                                                        double tol, int threads = 1);

}  // namespace glhydro
