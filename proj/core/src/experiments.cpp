#include "glhydro/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "glhydro/dynamics.hpp"
#include "glhydro/errors.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/inequality_lab.hpp"
#include "glhydro/parallel.hpp"
#include "glhydro/rng.hpp"

namespace glhydro {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

MeanEstimate estimate(const std::vector<double>& v) {
  MeanEstimate e;
  const std::size_t n = v.size();
  if (n == 0) return e;
  double s = 0.0;
  for (double x : v) s += x;
  e.mean = s / n;
  if (n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(ss / (n - 1) / n);
  }
  return e;
}

/// Observations recorded per trajectory and checkpoint.
enum Obs { kTheta, kHminus1, kMismatch, kMoment, kObsCount };

struct Stage {
  const HydroScenario& sc;
  std::vector<double> times;
  std::vector<std::vector<double>> zeta_at;
};

std::vector<FreeEnergyModel> block_models(const HydroScenario& sc, std::span<const double> field,
                                          int m, double lo, double hi) {
  const int K = static_cast<int>(field.size()) / m;
  const auto grid = uniform_grid(lo, hi, static_cast<std::size_t>(sc.fe_nodes));
  std::map<std::vector<double>, std::size_t> cache;
  std::vector<FreeEnergyModel> unique;
  std::vector<std::size_t> which(m);
  for (int i = 0; i < m; ++i) {
    std::vector<double> key(field.begin() + i * K, field.begin() + (i + 1) * K);
    std::sort(key.begin(), key.end());
    auto it = cache.find(key);
    if (it == cache.end()) {
      unique.push_back(tabulate(sc.pot, key, FreeEnergyKind::psi_K, grid, sc.tol, sc.threads));
      it = cache.emplace(std::move(key), unique.size() - 1).first;
    }
    which[i] = it->second;
  }
  std::vector<FreeEnergyModel> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) out.push_back(unique[which[i]]);
  return out;
}

NEntry run_entry(const Stage& st, std::size_t index, std::uint64_t field_seed, bool want_bound) {
  const HydroScenario& sc = st.sc;
  const auto t_start = Clock::now();
  NEntry e;
  e.n = sc.n_list[index];
  e.m = sc.m_for(index);
  e.K = e.n / e.m;
  e.field_seed = field_seed;
  const FieldSpec spec = sc.field.with_seed(field_seed);
  const auto a = realize_field(spec, static_cast<std::size_t>(e.n)).values;
  const auto eta0 = sc.zeta0.cells(e.m);
  const auto [lo_it, hi_it] = std::minmax_element(eta0.begin(), eta0.end());
  const double lo = *lo_it - 1.0, hi = *hi_it + 1.0;

  MacroOde ode(e.n, block_models(sc, a, e.m, lo, hi));
  double c = 0.0, lambda = INFINITY;
  for (const auto& b : ode.blocks()) {
    c = std::max(c, b.max_d2());
    lambda = std::min(lambda, b.min_d2());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(abar_operator(e.n, e.m)->matrix(),
                                                    Eigen::EigenvaluesOnly);
  const double abar_max = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  const double ode_dt = 1.0 / (abar_max * c);  // RK4 is stable up to ~2.78 / (rate)

  const std::size_t nk = st.times.size();
  std::vector<std::vector<double>> eta_at(nk);
  std::vector<double> energy(nk);
  MacroProfile eta = MacroProfile::from_values(eta0);
  for (std::size_t k = 0; k < nk; ++k) {
    if (k > 0) {
      const double span = st.times[k] - st.times[k - 1];
      const int sub = std::max(1, static_cast<int>(std::ceil(span / ode_dt)));
      for (int s = 0; s < sub; ++s) eta = ode.step(eta, span / sub);
    }
    eta_at[k] = eta.y;
    energy[k] = ode.energy(eta.y);
  }
  const auto lyap = lyapunov_audit(energy);
  e.ode_lyapunov_pass = lyap.pass;
  e.ode_lyapunov_max_increment = lyap.max_increment;

  std::unique_ptr<InitialSampler> sampler;
  if (!sc.exact_initial) sampler = std::make_unique<InitialSampler>(sc.pot, a, eta0, sc.tol);
  SdeConfig cfg;
  cfg.dt = sc.sde_dt;
  cfg.t_end = sc.T;
  cfg.n_traj = sc.n_traj;
  cfg.seed = sc.seed;
  const std::uint64_t stream_seed =
      derive_seed(derive_seed(sc.seed, field_seed), static_cast<std::uint64_t>(e.n));

  std::vector<std::vector<std::array<double, kObsCount>>> obs(
      sc.n_traj, std::vector<std::array<double, kObsCount>>(nk));
  parallel_for(static_cast<std::size_t>(sc.n_traj), sc.threads, [&](std::size_t traj) {
    CounterStream rng(stream_seed, traj);
    MicroState x = sampler ? sampler->sample(rng) : MicroState::from_values(lift_Pt(eta0, e.K));
    for (std::size_t k = 0; k < nk; ++k) {
      if (k > 0) advance(x, sc.pot, a, st.times[k - 1], st.times[k], cfg, rng);
      auto& o = obs[traj][k];
      o[kTheta] = theta_sample(x.x, eta_at[k], e.K);
      o[kHminus1] = hminus1_sq_step_distance(x.x, st.zeta_at[k]);
      const auto px = project_P(x.x, e.K);
      double mm = 0.0;
      for (int i = 0; i < e.m; ++i) mm += (px[i] - eta_at[k][i]) * (px[i] - eta_at[k][i]);
      o[kMismatch] = mm / e.m;
      double sq = 0.0;
      for (double v : x.x) sq += v * v;
      o[kMoment] = sq / e.n;
    }
  });

  e.traj_hminus1.assign(sc.n_traj, std::vector<double>(nk));
  std::vector<double> col(sc.n_traj);
  for (std::size_t k = 0; k < nk; ++k) {
    SeriesPoint p;
    p.n = e.n;
    p.field_seed = field_seed;
    p.t = st.times[k];
    p.eta_energy = energy[k];
    MeanEstimate* slots[kObsCount] = {&p.theta, &p.hminus1, &p.macro_mismatch, &p.moment};
    for (int q = 0; q < kObsCount; ++q) {
      for (int r = 0; r < sc.n_traj; ++r) col[r] = obs[r][k][q];
      *slots[q] = estimate(col);
    }
    for (int r = 0; r < sc.n_traj; ++r) e.traj_hminus1[r][k] = obs[r][k][kHminus1];
    if (p.hminus1.mean > e.D) {
      e.D = p.hminus1.mean;
      e.D_stderr = p.hminus1.std_error;
    }
    if (p.theta.mean >= e.sup_theta) {
      e.sup_theta = p.theta.mean;
      e.bound.sup_theta_stderr = p.theta.std_error;
    }
    e.series.push_back(p);
  }

  if (want_bound) {
    BoundTerms& b = e.bound;
    b.sup_theta = e.sup_theta;
    b.gamma = fluctuation_poincare_gamma(e.n, e.m);
    b.C1 = sampler ? std::max(sampler->entropy(), 0.0) / e.n : std::numeric_limits<double>::infinity();
    b.lambda = lambda;
    const std::vector<double> pair{a[0], a[1]};
    const double mean = mean_of(eta0);
    TestFunctionFamily fam;
    fam.seed = derive_seed(sc.seed, 0xC0);
    b.C0 = check_covariance_estimate(sc.pot, pair, mean, fam, sc.tol, 2001).worst_ratio;
    b.rho = spectral_gap_canonical(sc.pot, pair, mean, 801).gap;
    b.alpha = 0.0;
    for (const auto& p : e.series) b.alpha = std::max(b.alpha, p.moment.mean);
    b.C2 = std::max(energy.front(), 0.0);
    double inf_h = 0.0;
    for (const auto& blk : ode.blocks()) {
      const auto v = blk.values();
      inf_h += *std::min_element(v.begin(), v.end());
    }
    b.beta = std::max(0.0, -inf_h / e.m);
    b.theta0 = e.series.front().theta.mean;
    b.tm_over_n = sc.T * e.m / static_cast<double>(e.n);
    const double M2 = static_cast<double>(e.m) * e.m;
    b.covariance_term = b.C0 == 0.0 ? 0.0 : b.gamma * b.C0 * b.C1 * e.K / (2.0 * b.lambda * M2);
    b.fluctuation_term = std::sqrt(b.gamma) / e.m * std::sqrt(2.0 * b.alpha + 2.0 * b.C1 / b.rho) *
                         std::sqrt(b.C1 + b.C2 + b.beta);
    b.total = b.theta0 + b.tm_over_n + b.covariance_term + b.fluctuation_term;
    b.holds = b.sup_theta <= b.total;
  }
  e.wall_seconds = seconds_since(t_start);
  return e;
}

RateFit fit_rate(const std::string& name, std::uint64_t field_seed, const std::vector<NEntry*>& es,
                 const HydroScenario& sc) {
  RateFit r;
  r.name = name;
  r.field_seed = field_seed;
  std::vector<double> lx, ly;
  for (const NEntry* e : es) {
    r.n.push_back(e->n);
    r.value.push_back(e->D);
    lx.push_back(e->n);
    ly.push_back(e->D);
  }
  r.strictly_decreasing = r.value.size() >= 2;
  for (std::size_t i = 1; i < r.value.size(); ++i) {
    if (!(r.value[i] < r.value[i - 1])) r.strictly_decreasing = false;
  }
  r.slope = loglog_slope(lx, ly);
  r.ci_low = r.ci_high = r.slope;
  if (sc.bootstrap > 0 && es.size() >= 2) {
    CounterStream rng(derive_seed(sc.seed, 0xB007), field_seed);
    std::vector<double> slopes;
    std::vector<double> yb(es.size());
    for (int b = 0; b < sc.bootstrap; ++b) {
      for (std::size_t j = 0; j < es.size(); ++j) {
        const auto& tr = es[j]->traj_hminus1;
        const std::size_t nt = tr.size(), nk = tr.front().size();
        std::vector<double> sum(nk, 0.0);
        for (std::size_t r2 = 0; r2 < nt; ++r2) {
          const auto pick = static_cast<std::size_t>(rng.next_uniform() * nt);
          for (std::size_t k = 0; k < nk; ++k) sum[k] += tr[std::min(pick, nt - 1)][k];
        }
        yb[j] = *std::max_element(sum.begin(), sum.end()) / nt;
      }
      slopes.push_back(loglog_slope(lx, yb));
    }
    std::sort(slopes.begin(), slopes.end());
    const auto at = [&](double q) {
      return slopes[static_cast<std::size_t>(std::floor(q * (slopes.size() - 1)))];
    };
    r.ci_low = at(0.025);
    r.ci_high = at(0.975);
  }
  return r;
}

RunRecord run_pipeline(const HydroScenario& sc, bool want_bound) {
  sc.validate();
  const auto t0 = Clock::now();
  RunRecord rec;
  rec.kind = want_bound ? "bound_audit" : "hydro_convergence";
  rec.config = sc.echo();
  rec.seeds = sc.field_seeds;
  rec.seeds.insert(rec.seeds.begin(), sc.seed);
  std::ostringstream id;
  id << sc.name << '-' << rec.kind << "-s" << sc.seed;
  rec.run_id = id.str();

  Stage st{sc, {}, {}};
  for (int k = 0; k < sc.checkpoints; ++k) {
    st.times.push_back(sc.T * k / (sc.checkpoints - 1));
  }
  rec.checkpoints = st.times;

  // Hydrodynamic limit on the fine grid, once for the whole scenario: phi~
  // depends on the law of the field only.
  rec.pde_grid = sc.resolved_pde_grid();
  PdeGrid grid{sc.zeta0.cells(rec.pde_grid)};
  const auto [lo_it, hi_it] = std::minmax_element(grid.values.begin(), grid.values.end());
  const auto fe = tabulate_phi_tilde(sc.pot, sc.field, uniform_grid(*lo_it - 1.0, *hi_it + 1.0, 161),
                                     sc.tol, sc.threads);
  const double mass0 = grid.mass();
  std::vector<double> pde_energy_at;
  for (std::size_t k = 0; k < st.times.size(); ++k) {
    if (k > 0) hydro_pde_advance(grid, fe, st.times[k - 1], st.times[k]);
    st.zeta_at.push_back(grid.values);
    pde_energy_at.push_back(pde_energy(grid, fe));
  }
  rec.pde_mass_drift = std::abs(grid.mass() - mass0);
  const auto lyap = lyapunov_audit(pde_energy_at);
  rec.pde_lyapunov_pass = lyap.pass;
  rec.pde_lyapunov_max_increment = lyap.max_increment;

  for (std::uint64_t fs : sc.field_seeds) {
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < sc.n_list.size(); ++i) {
      try {
        rec.entries.push_back(run_entry(st, i, fs, want_bound));
        ok.push_back(rec.entries.size() - 1);
      } catch (const std::exception& ex) {
        NEntry e;
        e.n = sc.n_list[i];
        e.m = sc.m_for(i);
        e.K = e.n / e.m;
        e.field_seed = fs;
        e.failed = true;
        e.error = ex.what();
        rec.entries.push_back(std::move(e));
      }
    }
    std::vector<NEntry*> es;
    for (std::size_t j : ok) es.push_back(&rec.entries[j]);
    if (!es.empty()) rec.rates.push_back(fit_rate("hminus1_sup", fs, es, sc));
  }
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

}  // namespace

Zeta0 Zeta0::parse(const std::string& text) {
  Zeta0 z;
  if (text == "zero") {
    z.kind = Kind::zero;
    z.amplitude = 0.0;
    return z;
  }
  std::istringstream is(text);
  std::string head;
  std::getline(is, head, ':');
  if (head != "sine") throw ValidationError("zeta0 must be 'zero' or 'sine[:AMP[:MODE]]', got '" + text + "'");
  std::string part;
  try {
    if (std::getline(is, part, ':')) z.amplitude = std::stod(part);
    if (std::getline(is, part, ':')) z.mode = std::stoi(part);
  } catch (const std::exception&) {
    throw ValidationError("cannot parse zeta0 '" + text + "'");
  }
  if (z.mode < 1) throw ValidationError("zeta0 mode must be >= 1");
  return z;
}

std::string Zeta0::describe() const {
  if (kind == Kind::zero) return "zero";
  return "sine:" + fmt(amplitude) + ":" + std::to_string(mode);
}

double Zeta0::operator()(double theta) const {
  if (kind == Kind::zero) return 0.0;
  return amplitude * std::sin(2.0 * std::numbers::pi * mode * theta);
}

double Zeta0::cell_average(double a, double b) const {
  if (kind == Kind::zero) return 0.0;
  const double w = 2.0 * std::numbers::pi * mode;
  return amplitude * (std::cos(w * a) - std::cos(w * b)) / (w * (b - a));
}

std::vector<double> Zeta0::cells(int n) const {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = cell_average(double(i) / n, double(i + 1) / n);
  center(v);
  return v;
}

int default_m_rule(int n) {
  if (n < 1) throw ValidationError("lattice size must be positive");
  const int target = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  int best = 1;
  for (int d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    if (std::abs(d - target) < std::abs(best - target) ||
        (std::abs(d - target) == std::abs(best - target) && d > best)) {
      best = d;
    }
  }
  return best;
}

int HydroScenario::m_for(std::size_t index) const {
  if (!m_list.empty()) return m_list.at(index);
  return default_m_rule(n_list.at(index));
}

int HydroScenario::resolved_pde_grid() const {
  if (pde_grid > 0) return pde_grid;
  long l = 1;
  for (int n : n_list) l = std::lcm(l, static_cast<long>(n));
  long g = l;
  while (g < 512) g += l;
  return static_cast<int>(g);
}

void HydroScenario::validate() const {
  if (n_list.empty()) throw ValidationError("scenario needs at least one lattice size");
  if (!m_list.empty() && m_list.size() != n_list.size()) {
    throw ValidationError("m_list must match n_list in length");
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 4) throw ValidationError("lattice sizes must be >= 4");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ValidationError("n_list must be increasing");
    const int m = m_for(i);
    if (m < 2 || n_list[i] % m != 0) {
      throw ValidationError("M = " + std::to_string(m) + " must be >= 2 and divide N = " +
                            std::to_string(n_list[i]));
    }
  }
  const int g = resolved_pde_grid();
  for (int n : n_list) {
    if (g % n != 0) throw ValidationError("PDE grid must be a multiple of every N");
  }
  if (!(T > 0.0)) throw ValidationError("horizon T must be positive");
  if (n_traj < 1) throw ValidationError("need at least one trajectory");
  if (checkpoints < 2) throw ValidationError("need at least two checkpoints");
  if (field_seeds.empty()) throw ValidationError("need at least one field seed");
  if (fe_nodes < 4) throw ValidationError("free-energy tabulation needs >= 4 nodes");
  if (!(sde_dt > 0.0) || !(tol > 0.0)) throw ValidationError("sde_dt and tol must be positive");
  field.validate();
}

std::vector<std::pair<std::string, std::string>> HydroScenario::echo() const {
  std::vector<int> ms;
  for (std::size_t i = 0; i < n_list.size(); ++i) ms.push_back(m_for(i));
  std::string atoms;
  for (const auto& at : field.atoms) atoms += (atoms.empty() ? "" : ",") + fmt(at.value) + ":" + fmt(at.prob);
  return {{"name", name},
          {"potential.kind", pot.name()},
          {"potential.perturb_amp", fmt(pot.perturb_amp())},
          {"field.kind", std::string(field_kind_name(field.kind))},
          {"field.L", fmt(field.L)},
          {"field.atoms", atoms},
          {"field.seeds", join(field_seeds)},
          {"hydro.n_list", join(n_list)},
          {"hydro.m_list", join(ms)},
          {"hydro.zeta0", zeta0.describe()},
          {"hydro.T", fmt(T)},
          {"hydro.n_traj", std::to_string(n_traj)},
          {"hydro.pde_grid", std::to_string(resolved_pde_grid())},
          {"hydro.checkpoints", std::to_string(checkpoints)},
          {"hydro.sde_dt", fmt(sde_dt)},
          {"hydro.fe_nodes", std::to_string(fe_nodes)},
          {"hydro.bootstrap", std::to_string(bootstrap)},
          {"hydro.exact_initial", exact_initial ? "true" : "false"},
          {"run.seed", std::to_string(seed)},
          {"run.tol", fmt(tol)}};
}

RunRecord run_theorem_bound_audit(const HydroScenario& scenario) {
  return run_pipeline(scenario, true);
}

RunRecord run_hydro_convergence(const HydroScenario& scenario) {
  return run_pipeline(scenario, false);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

FreeEnergyConvergenceReport run_free_energy_convergence(const Potential& pot, const FieldSpec& field,
                                                        const std::vector<int>& k_list,
                                                        const std::vector<double>& m_grid,
                                                        int n_field_draws, std::uint64_t seed,
                                                        double tol, int threads) {
  if (k_list.empty() || m_grid.empty()) throw ValidationError("need K values and m values");
  if (n_field_draws < 1) throw ValidationError("need at least one field draw");
  for (std::size_t i = 1; i < k_list.size(); ++i) {
    if (k_list[i] <= k_list[i - 1]) throw ValidationError("k_list must be increasing");
  }
  field.validate();
  FreeEnergyConvergenceReport rep;
  rep.m_grid = m_grid;
  rep.phi_tilde.resize(m_grid.size());
  parallel_for(m_grid.size(), threads, [&](std::size_t j) {
    rep.phi_tilde[j] = phi_tilde(pot, field, m_grid[j], tol).value;
  });
  for (int K : k_list) {
    if (K < 1) throw ValidationError("block sizes must be positive");
    FreeEnergyConvergenceRow row;
    row.K = K;
    std::vector<std::vector<double>> vals(n_field_draws, std::vector<double>(m_grid.size()));
    parallel_for(static_cast<std::size_t>(n_field_draws), threads, [&](std::size_t d) {
      const auto block =
          realize_field(field.with_seed(derive_seed(seed, d)), static_cast<std::size_t>(K)).values;
      for (std::size_t j = 0; j < m_grid.size(); ++j) vals[d][j] = phi_K(pot, block, m_grid[j], tol).value;
    });
    for (int d = 0; d < n_field_draws; ++d) {
      double s = 0.0;
      for (std::size_t j = 0; j < m_grid.size(); ++j) s = std::max(s, std::abs(vals[d][j] - rep.phi_tilde[j]));
      row.sup_diff.push_back(s);
      rep.max_sup_diff = std::max(rep.max_sup_diff, s);
    }
    row.mean_sup_diff = estimate(row.sup_diff).mean;
    row.min_margin = INFINITY;
    std::vector<double> col(n_field_draws);
    for (std::size_t j = 0; j < m_grid.size(); ++j) {
      for (int d = 0; d < n_field_draws; ++d) col[d] = vals[d][j];
      const auto e = estimate(col);
      row.mean_phi.push_back(e.mean);
      row.stderr_phi.push_back(e.std_error);
      row.min_margin = std::min(row.min_margin, e.mean - rep.phi_tilde[j] + 3.0 * e.std_error);
    }
    rep.rows.push_back(std::move(row));
  }
  rep.decreasing = rep.rows.size() >= 2;
  rep.subadditive = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (i > 0 && !(rep.rows[i].mean_sup_diff < rep.rows[i - 1].mean_sup_diff)) rep.decreasing = false;
    if (rep.rows[i].min_margin < 0.0) rep.subadditive = false;
  }
  return rep;
}

}  // namespace glhydro
