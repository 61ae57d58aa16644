#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glhydro/errors.hpp"
#include "glhydro/experiments.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/inequality_lab.hpp"
#include "glhydro/io.hpp"

namespace glhydro::cli {
namespace {

using nlohmann::json;

/// Collects criterion outcomes and prints one PASS/FAIL line each.
class Verdicts {
 public:
  explicit Verdicts(std::ostream& os) : os_(os) {}
  void add(const std::string& name, bool pass, const std::string& detail) {
    os_ << (pass ? "PASS" : "FAIL") << ' ' << name << ": " << detail << '\n';
    all_ = all_ && pass;
    list_.push_back({{"criterion", name}, {"pass", pass}, {"detail", detail}});
  }
  bool all() const { return all_; }
  const json& list() const { return list_; }

 private:
  std::ostream& os_;
  bool all_ = true;
  json list_ = json::array();
};

void write_json(const json& j, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

void write_manifest(const Context& ctx, const std::string& command) {
  json config = json::object();
  for (const auto& [k, v] : ctx.settings.all()) config[k] = v;
  write_json({{"command", command},
              {"config", config},
              {"seeds", {{"run", ctx.settings.u64("run.seed")}}},
              {"versions", {{"glhydro", version()}}}},
             ctx.out / "manifest.json");
}

void write_summary(const Context& ctx, json summary, const Verdicts& v) {
  summary["criteria"] = v.list();
  summary["pass"] = v.all();
  write_json(summary, ctx.out / "summary.json");
}

std::string fmt(double v) { return format_double(v); }

std::string short_fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

int threads(const Context& ctx) {
  const long t = ctx.settings.integer("run.threads");
  if (t < 1) throw UsageError("--threads must be >= 1");
  return static_cast<int>(t);
}

double tol(const Context& ctx) {
  const double t = ctx.settings.real("run.tol");
  if (!(t > 0.0) || t >= 1e-2) throw UsageError("--tol must be in (0, 1e-2)");
  return t;
}

std::vector<double> m_grid(const Settings& s, const std::string& section) {
  const double lo = s.real(section + ".m_min");
  const double hi = s.real(section + ".m_max");
  const long n = s.integer(section + ".m_nodes");
  if (n < 4 || !(hi > lo)) throw UsageError(section + ": need m_max > m_min and at least 4 nodes");
  return uniform_grid(lo, hi, static_cast<std::size_t>(n));
}

void log(const Context& ctx, const std::string& msg) {
  if (ctx.verbose) std::cerr << msg << '\n';
}

HydroScenario scenario_from(const Context& ctx, const std::string& name) {
  const Settings& s = ctx.settings;
  HydroScenario sc;
  sc.name = name;
  sc.pot = s.potential();
  sc.field = s.field();
  sc.n_list = s.int_list("hydro.n_list");
  sc.m_list = s.int_list("hydro.m_list");
  try {
    sc.zeta0 = Zeta0::parse(s.str("hydro.zeta0"));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  sc.T = s.real("hydro.T");
  sc.n_traj = static_cast<int>(s.integer("hydro.n_traj"));
  sc.pde_grid = static_cast<int>(s.integer("hydro.pde_grid"));
  sc.field_seeds = s.u64_list("hydro.field_seeds");
  if (sc.field_seeds.empty()) sc.field_seeds = {sc.field.master_seed};
  sc.seed = s.u64("run.seed");
  sc.checkpoints = static_cast<int>(s.integer("hydro.checkpoints"));
  sc.sde_dt = s.real("hydro.sde_dt");
  sc.tol = tol(ctx);
  sc.fe_nodes = static_cast<int>(s.integer("hydro.fe_nodes"));
  sc.bootstrap = static_cast<int>(s.integer("hydro.bootstrap"));
  sc.threads = threads(ctx);
  sc.exact_initial = s.flag("hydro.exact_initial");
  try {
    sc.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  return sc;
}

}  // namespace

int cmd_free_energy(Context& ctx) {
  const Settings& s = ctx.settings;
  const auto pot = s.potential();
  const auto field = s.field();
  const long K = s.integer("free_energy.K");
  if (K < 1 || K > 4096) throw UsageError("--k must be in [1, 4096]");
  const double t = tol(ctx);
  const int th = threads(ctx);
  const auto grid = m_grid(s, "free_energy");
  const auto block = realize_field(field, static_cast<std::size_t>(K)).values;
  std::filesystem::create_directories(ctx.out);
  write_manifest(ctx, "free-energy");

  const auto sig = uniform_grid(s.real("free_energy.sigma_min"), s.real("free_energy.sigma_max"),
                                grid.size());
  CsvTable star({"m", "value", "d1", "d2"});
  for (double sg : sig) {
    const auto tm = log_partition_1d(pot, sg, t);
    star.row({fmt(sg), fmt(tm.log_z), fmt(tm.m), fmt(tm.s2)});
  }
  star.write(ctx.out / "phi_star.csv");
  write_json({{"kind", "phi_star"},
              {"argument", "sigma"},
              {"columns", {"sigma", "log_z", "mean", "variance"}},
              {"potential", {{"kind", pot.name()}, {"perturb_amp", pot.perturb_amp()}}},
              {"tol", t}},
             ctx.out / "phi_star.csv.json");
  log(ctx, "phi_star done");

  Verdicts v(std::cout);
  const double floor = s.real("criteria.psi_convexity_min");
  json summary{{"K", K}, {"block_field", block}};
  struct Item {
    const char* file;
    FreeEnergyKind kind;
  };
  for (const Item& item : {Item{"phi_K.csv", FreeEnergyKind::phi_K},
                           Item{"psi_K.csv", FreeEnergyKind::psi_K},
                           Item{"phi_tilde.csv", FreeEnergyKind::phi_tilde}}) {
    const auto model = item.kind == FreeEnergyKind::phi_tilde
                           ? tabulate_phi_tilde(pot, field, grid, t, th)
                           : tabulate(pot, block, item.kind, grid, t, th);
    write_free_energy(model, pot, field, t, ctx.out / item.file);
    const auto name = free_energy_kind_name(item.kind);
    v.add(name + " convexity", model.min_d2() > floor,
          "min d2 = " + short_fmt(model.min_d2()) + " > " + short_fmt(floor));
    summary[name] = {{"min_d2", model.min_d2()}, {"max_d2", model.max_d2()}};
    log(ctx, name + " done");
  }
  write_summary(ctx, summary, v);
  return v.all() ? 0 : 1;
}

int cmd_cramer(Context& ctx) {
  const Settings& s = ctx.settings;
  const auto pot = s.potential();
  const auto field = s.field();
  const long k_min = s.integer("cramer.k_min"), k_max = s.integer("cramer.k_max");
  if (k_min < 2 || k_max > 16 || k_max < k_min) throw UsageError("need 2 <= kmin <= kmax <= 16");
  std::vector<int> ks;
  for (long k = k_min; k <= k_max; ++k) ks.push_back(static_cast<int>(k));
  const auto grid = m_grid(s, "cramer");
  const double t = tol(ctx);
  std::filesystem::create_directories(ctx.out);
  write_manifest(ctx, "cramer");

  const auto rep = check_cramer(pot, field, ks, grid, t, threads(ctx));
  CsvTable tab({"K", "sup_diff", "argsup", "min_psi_d2", "min_phi_d2", "gaussian_exact"});
  for (const auto& r : rep.rows) {
    tab.row({std::to_string(r.K), fmt(r.sup_diff), fmt(r.argsup), fmt(r.min_psi_d2),
             fmt(r.min_phi_d2), fmt(std::log(2.0 * std::numbers::pi) / (2.0 * r.K))});
  }
  tab.write(ctx.out / "cramer.csv");

  const double smax = s.real("cramer.sigma_max");
  const auto narrow = check_caputo(pot, uniform_grid(-smax, smax, 101), t);
  const auto wide = check_caputo(pot, uniform_grid(-2 * smax, 2 * smax, 201), t);
  CsvTable cap({"sigma", "ratio"});
  for (std::size_t i = 0; i < wide.sigma.size(); ++i) cap.row({fmt(wide.sigma[i]), fmt(wide.ratio[i])});
  cap.write(ctx.out / "caputo.csv");

  Verdicts v(std::cout);
  const double lo = s.real("criteria.cramer_slope_min"), hi = s.real("criteria.cramer_slope_max");
  v.add("cramer slope", rep.slope >= lo && rep.slope <= hi,
        "fitted slope " + short_fmt(rep.slope) + " in [" + short_fmt(lo) + ", " + short_fmt(hi) + "]");
  const double frac = s.real("criteria.cramer_psi_d2_fraction");
  const long from_k = s.integer("criteria.cramer_psi_d2_from_k");
  bool convex = true;
  double worst = INFINITY;
  for (const auto& r : rep.rows) {
    if (r.K < from_k) continue;
    worst = std::min(worst, r.min_psi_d2 / r.min_phi_d2);
    convex = convex && r.min_psi_d2 >= frac * r.min_phi_d2;
  }
  v.add("psi_K convexity", convex,
        "min psi_K''/min phi_K'' = " + short_fmt(worst) + " >= " + short_fmt(frac) + " for K >= " +
            std::to_string(from_k));
  const double cr = wide.C / narrow.C;
  v.add("caputo stability", std::isfinite(wide.C) && cr <= 1.5,
        "C = " + short_fmt(narrow.C) + " -> " + short_fmt(wide.C) + " (ratio " + short_fmt(cr) + " <= 1.5)");
  write_summary(ctx, {{"slope", rep.slope}, {"caputo_C", narrow.C}, {"caputo_C_wide", wide.C}}, v);
  return v.all() ? 0 : 1;
}

int cmd_covariance(Context& ctx) {
  const Settings& s = ctx.settings;
  const auto pot = s.potential();
  const auto field = s.field();
  const auto ks = s.int_list("covariance.k_list");
  if (ks.empty()) throw UsageError("--K needs at least one block size");
  for (int K : ks) {
    if (K != 2 && K != 3) throw UsageError("covariance estimate supports K = 2 or 3");
  }
  TestFunctionFamily fam;
  try {
    fam.kind = test_function_kind_from_name(s.str("covariance.family"));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  fam.count = static_cast<int>(s.integer("covariance.count"));
  if (fam.count < 1) throw UsageError("--count must be >= 1");
  fam.seed = s.u64("run.seed");
  const double m = s.real("covariance.m");
  const double t = tol(ctx);
  const int grid = static_cast<int>(s.integer("covariance.grid"));
  std::filesystem::create_directories(ctx.out);
  write_manifest(ctx, "covariance");

  CsvTable tab({"K", "m", "case", "lhs", "rhs", "ratio"});
  std::vector<double> c0;
  double max_lhs = 0.0;
  json per_k = json::array();
  for (int K : ks) {
    const auto block = realize_field(field, static_cast<std::size_t>(K)).values;
    const auto rep = check_covariance_estimate(pot, block, m, fam, t, grid);
    for (const auto& r : rep.rows) {
      tab.row({std::to_string(K), fmt(m), std::to_string(r.index), fmt(r.lhs), fmt(r.rhs), fmt(r.ratio)});
      max_lhs = std::max(max_lhs, r.lhs);
    }
    c0.push_back(rep.worst_ratio);
    per_k.push_back({{"K", K}, {"C0", rep.worst_ratio}, {"mass_error", rep.mass_error}});
    std::cout << "C0(K=" << K << ") = " << short_fmt(rep.worst_ratio) << '\n';
  }
  tab.write(ctx.out / "covariance.csv");
  Verdicts v(std::cout);
  const bool finite = std::all_of(c0.begin(), c0.end(), [](double c) { return std::isfinite(c); });
  v.add("C0 finite", finite, "max |cov| = " + short_fmt(max_lhs));
  const double lim = s.real("criteria.covariance_ratio_max");
  if (c0.size() >= 2 && c0.front() > 0.0) {
    const double r = c0.back() / c0.front();
    v.add("C0 growth", r <= lim,
          "C0(K=" + std::to_string(ks.back()) + ")/C0(K=" + std::to_string(ks.front()) + ") = " +
              short_fmt(r) + " <= " + short_fmt(lim));
  }
  write_summary(ctx, {{"per_K", per_k}, {"max_lhs", max_lhs}}, v);
  return v.all() ? 0 : 1;
}

int cmd_gap(Context& ctx) {
  const Settings& s = ctx.settings;
  const auto pot = s.potential();
  const auto field = s.field();
  const auto ks = s.int_list("gap.k_list");
  const auto ms = s.real_list("gap.m_list");
  auto seeds = s.u64_list("gap.field_seeds");
  if (seeds.empty()) seeds = {field.master_seed};
  const long grid2 = s.integer("gap.grid"), grid3 = s.integer("gap.grid3");
  if (ks.empty() || ms.empty()) throw UsageError("gap needs K and m values");
  for (int K : ks) {
    if (K != 2 && K != 3) throw UsageError("gap supports K = 2 or 3");
  }
  for (long g : {grid2, grid3}) {
    if (g < 5 || g % 2 == 0) throw UsageError("gap grids must be odd and >= 5");
  }
  std::filesystem::create_directories(ctx.out);
  write_manifest(ctx, "gap");

  CsvTable tab({"K", "m", "field_seed", "gap", "half_width", "nodes_per_axis"});
  double lo = INFINITY, hi = 0.0;
  for (int K : ks) {
    for (double m : ms) {
      for (auto seed : seeds) {
        const auto block = realize_field(field.with_seed(seed), static_cast<std::size_t>(K)).values;
        const auto r = spectral_gap_canonical(pot, block, m, static_cast<int>(K == 2 ? grid2 : grid3));
        tab.row({std::to_string(K), fmt(m), std::to_string(seed), fmt(r.gap), fmt(r.half_width),
                 std::to_string(r.nodes_per_axis)});
        std::cout << "gap K=" << K << " m=" << m << " seed=" << seed << ": " << fmt(r.gap) << '\n';
        lo = std::min(lo, r.gap);
        hi = std::max(hi, r.gap);
      }
    }
  }
  tab.write(ctx.out / "gap.csv");
  Verdicts v(std::cout);
  v.add("gap positive", lo > 0.0, "min gap = " + short_fmt(lo));
  const double lim = s.real("criteria.gap_ratio_max");
  v.add("gap uniformity", hi / lo <= lim, "max/min = " + short_fmt(hi / lo) + " <= " + short_fmt(lim));
  write_summary(ctx, {{"min_gap", lo}, {"max_gap", hi}}, v);
  return v.all() ? 0 : 1;
}

int cmd_simulate(Context& ctx) {
  const auto sc = scenario_from(ctx, "simulate");
  log(ctx, "running bound audit");
  const auto rec = run_theorem_bound_audit(sc);
  write_run_directory(rec, ctx.out);
  Verdicts v(std::cout);
  for (const auto& e : rec.entries) {
    const std::string tag = "N=" + std::to_string(e.n) + " seed=" + std::to_string(e.field_seed);
    if (e.failed) {
      v.add("run " + tag, false, e.error);
      continue;
    }
    v.add("bound " + tag, e.bound.holds,
          "sup Theta = " + short_fmt(e.bound.sup_theta) + " <= " + short_fmt(e.bound.total));
    v.add("macro energy " + tag, e.ode_lyapunov_pass,
          "max increment " + short_fmt(e.ode_lyapunov_max_increment));
  }
  v.add("pde energy", rec.pde_lyapunov_pass, "max increment " + short_fmt(rec.pde_lyapunov_max_increment));
  return v.all() ? 0 : 1;
}

int cmd_hydrolimit(Context& ctx) {
  const auto sc = scenario_from(ctx, "hydrolimit");
  log(ctx, "running hydrodynamic convergence sweep");
  const auto rec = run_hydro_convergence(sc);
  write_run_directory(rec, ctx.out);
  Verdicts v(std::cout);
  for (const auto& e : rec.entries) {
    if (e.failed) v.add("run N=" + std::to_string(e.n), false, e.error);
  }
  const auto& s = ctx.settings;
  for (const auto& r : rec.rates) {
    std::string values;
    for (double d : r.value) values += (values.empty() ? "" : " > ") + short_fmt(d);
    v.add("D(N) decreasing seed=" + std::to_string(r.field_seed), r.strictly_decreasing, values);
    if (s.has("criteria.hydro_slope_max") && r.n.size() >= 3) {
      const double lim = s.real("criteria.hydro_slope_max");
      v.add("D(N) slope seed=" + std::to_string(r.field_seed), r.slope <= lim,
            short_fmt(r.slope) + " [" + short_fmt(r.ci_low) + ", " + short_fmt(r.ci_high) + "] <= " +
                short_fmt(lim));
    }
  }
  v.add("pde energy", rec.pde_lyapunov_pass, "max increment " + short_fmt(rec.pde_lyapunov_max_increment));
  return v.all() ? 0 : 1;
}

}  // namespace glhydro::cli
