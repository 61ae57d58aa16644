#include "glhydro/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "glhydro/errors.hpp"

#ifndef GLHYDRO_VERSION
#define GLHYDRO_VERSION "0.0.0"
#endif

namespace glhydro {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

/// JSON has no representation for inf/nan; those become strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

void write_json(const json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json field_json(const FieldSpec& field) {
  json atoms = json::array();
  for (const auto& a : field.discrete_atoms()) atoms.push_back({{"value", a.value}, {"prob", a.prob}});
  return {{"kind", std::string(field_kind_name(field.kind))},
          {"L", field.L},
          {"seed", field.master_seed},
          {"atoms", atoms}};
}

}  // namespace

std::string version() { return GLHYDRO_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ValidationError("CSV row width differs from header");
  rows_.push_back(std::move(cells));
  return *this;
}

void CsvTable::write(const std::filesystem::path& path) const {
  auto out = open_out(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void write_free_energy(const FreeEnergyModel& model, const Potential& pot, const FieldSpec& field,
                       double tol, const std::filesystem::path& path) {
  CsvTable t({"m", "value", "d1", "d2"});
  for (std::size_t i = 0; i < model.grid().size(); ++i) {
    t.row({format_double(model.grid()[i]), format_double(model.values()[i]),
           format_double(model.d1()[i]), format_double(model.d2()[i])});
  }
  t.write(path);
  json side{{"kind", free_energy_kind_name(model.kind())},
            {"potential", {{"kind", pot.name()}, {"perturb_amp", pot.perturb_amp()}}},
            {"field", field_json(field)},
            {"tol", tol},
            {"version", version()}};
  if (model.K() > 0) {
    side["K"] = model.K();
    side["block_field"] = std::vector<double>(model.block_field().begin(), model.block_field().end());
  } else {
    side["K"] = nullptr;
  }
  write_json(side, path.string() + ".json");
}

void write_run_directory(const RunRecord& rec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json config = json::object();
  for (const auto& [k, v] : rec.config) config[k] = v;
  json entries = json::array();
  for (const auto& e : rec.entries) {
    entries.push_back({{"N", e.n},
                       {"M", e.m},
                       {"K", e.K},
                       {"field_seed", e.field_seed},
                       {"failed", e.failed},
                       {"error", e.error},
                       {"D", number(e.D)},
                       {"D_stderr", number(e.D_stderr)},
                       {"sup_theta", number(e.sup_theta)},
                       {"ode_lyapunov_pass", e.ode_lyapunov_pass},
                       {"ode_lyapunov_max_increment", number(e.ode_lyapunov_max_increment)},
                       {"wall_seconds", e.wall_seconds}});
  }
  write_json({{"run_id", rec.run_id},
              {"kind", rec.kind},
              {"config", config},
              {"seeds", rec.seeds},
              {"versions", {{"glhydro", version()}}},
              {"checkpoints", rec.checkpoints},
              {"pde_grid", rec.pde_grid},
              {"pde_lyapunov_pass", rec.pde_lyapunov_pass},
              {"pde_lyapunov_max_increment", number(rec.pde_lyapunov_max_increment)},
              {"pde_mass_drift", number(rec.pde_mass_drift)},
              {"entries", entries},
              {"wall_seconds", rec.wall_seconds}},
             dir / "manifest.json");

  CsvTable series({"N", "t", "theta", "theta_stderr", "hminus1_sq", "hminus1_stderr", "field_seed",
                   "macro_mismatch", "macro_mismatch_stderr", "moment", "eta_energy"});
  for (const auto& e : rec.entries) {
    for (const auto& p : e.series) {
      series.row({std::to_string(p.n), format_double(p.t), format_double(p.theta.mean),
                  format_double(p.theta.std_error), format_double(p.hminus1.mean),
                  format_double(p.hminus1.std_error), std::to_string(p.field_seed),
                  format_double(p.macro_mismatch.mean), format_double(p.macro_mismatch.std_error),
                  format_double(p.moment.mean), format_double(p.eta_energy)});
    }
  }
  series.write(dir / "series.csv");

  json rates = json::array();
  for (const auto& r : rec.rates) {
    rates.push_back({{"name", r.name},
                     {"field_seed", r.field_seed},
                     {"slope", number(r.slope)},
                     {"ci_low", number(r.ci_low)},
                     {"ci_high", number(r.ci_high)},
                     {"N", r.n},
                     {"value", r.value},
                     {"strictly_decreasing", r.strictly_decreasing}});
  }
  write_json({{"run_id", rec.run_id}, {"rates", rates}}, dir / "rates.json");

  CsvTable ineq({"N", "M", "K", "field_seed", "sup_theta", "sup_theta_stderr", "theta0", "tm_over_n",
                 "covariance_term", "fluctuation_term", "bound_total", "holds", "gamma", "C0", "C1",
                 "C2", "beta", "alpha", "lambda", "rho"});
  for (const auto& e : rec.entries) {
    if (e.failed || rec.kind != "bound_audit") continue;
    const auto& b = e.bound;
    ineq.row({std::to_string(e.n), std::to_string(e.m), std::to_string(e.K),
              std::to_string(e.field_seed), format_double(b.sup_theta),
              format_double(b.sup_theta_stderr), format_double(b.theta0), format_double(b.tm_over_n),
              format_double(b.covariance_term), format_double(b.fluctuation_term),
              format_double(b.total), b.holds ? "1" : "0", format_double(b.gamma),
              format_double(b.C0), format_double(b.C1), format_double(b.C2), format_double(b.beta),
              format_double(b.alpha), format_double(b.lambda), format_double(b.rho)});
  }
  ineq.write(dir / "inequalities.csv");
}

}  // namespace glhydro
