#include "settings.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <sstream>

namespace glhydro::cli {
namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"potential.kind", "gaussian"},
      {"potential.perturb_amp", "0.1"},
      {"field.kind", "zero"},
      {"field.L", "0.5"},
      {"field.atoms", ""},
      {"field.seed", ""},
      {"run.seed", "1"},
      {"run.tol", "1e-9"},
      {"run.threads", "1"},
      {"free_energy.K", "4"},
      {"free_energy.m_min", "-2"},
      {"free_energy.m_max", "2"},
      {"free_energy.m_nodes", "41"},
      {"free_energy.sigma_min", "-5"},
      {"free_energy.sigma_max", "5"},
      {"cramer.k_min", "2"},
      {"cramer.k_max", "10"},
      {"cramer.m_min", "-2"},
      {"cramer.m_max", "2"},
      {"cramer.m_nodes", "41"},
      {"cramer.sigma_max", "5"},
      {"covariance.k_list", "2,3"},
      {"covariance.m", "0.5"},
      {"covariance.family", "fourier"},
      {"covariance.count", "20"},
      {"covariance.grid", "0"},
      {"gap.k_list", "2"},
      {"gap.m_list", "0"},
      {"gap.field_seeds", ""},
      {"gap.grid", "801"},
      {"gap.grid3", "101"},
      {"hydro.n_list", "64"},
      {"hydro.m_list", ""},
      {"hydro.zeta0", "sine:0.5:1"},
      {"hydro.T", "0.1"},
      {"hydro.n_traj", "8"},
      {"hydro.pde_grid", "0"},
      {"hydro.field_seeds", ""},
      {"hydro.checkpoints", "32"},
      {"hydro.sde_dt", "1e-4"},
      {"hydro.fe_nodes", "41"},
      {"hydro.bootstrap", "200"},
      {"hydro.exact_initial", "false"},
      {"criteria.psi_convexity_min", "0"},
      {"criteria.cramer_slope_min", "-1.4"},
      {"criteria.cramer_slope_max", "-0.6"},
      {"criteria.cramer_psi_d2_fraction", "0.5"},
      {"criteria.cramer_psi_d2_from_k", "4"},
      {"criteria.covariance_ratio_max", "3"},
      {"criteria.gap_ratio_max", "3"},
      {"criteria.hydro_slope_max", "-0.3"},
      {"criteria.lyapunov_required", "true"},
  };
  return d;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (is.fail() || !is.eof()) throw UsageError("invalid value '" + text + "' for " + key);
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(parse_number<T>(key, item.substr(b, e - b + 1)));
  }
  return out;
}

}  // namespace

Settings::Settings() : values_(defaults()) {}

void Settings::load_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("config not found: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("cannot parse config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw UsageError("config key outside a section: " + section);
    for (const auto& [name, leaf] : body) set(section + "." + name, leaf.get_value<std::string>());
  }
}

void Settings::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  it->second = value;
}

bool Settings::has(const std::string& key) const {
  auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

std::string Settings::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

double Settings::real(const std::string& key) const { return parse_number<double>(key, str(key)); }
long Settings::integer(const std::string& key) const { return parse_number<long>(key, str(key)); }
std::uint64_t Settings::u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, str(key));
}

bool Settings::flag(const std::string& key) const {
  const auto v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("invalid boolean '" + v + "' for " + key);
}

std::vector<int> Settings::int_list(const std::string& key) const {
  return parse_list<int>(key, str(key));
}
std::vector<double> Settings::real_list(const std::string& key) const {
  return parse_list<double>(key, str(key));
}
std::vector<std::uint64_t> Settings::u64_list(const std::string& key) const {
  return parse_list<std::uint64_t>(key, str(key));
}

Potential Settings::potential() const {
  try {
    return Potential::from_name(str("potential.kind"), real("potential.perturb_amp"));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

FieldSpec Settings::field() const {
  FieldSpec f;
  try {
    f.kind = field_kind_from_name(str("field.kind"));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  f.L = real("field.L");
  f.master_seed = has("field.seed") ? u64("field.seed") : u64("run.seed");
  if (f.kind == FieldKind::custom_discrete) {
    std::istringstream is(str("field.atoms"));
    std::string item;
    while (std::getline(is, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw UsageError("field.atoms entries must be value:prob");
      f.atoms.push_back({parse_number<double>("field.atoms", item.substr(0, colon)),
                         parse_number<double>("field.atoms", item.substr(colon + 1))});
    }
  }
  try {
    f.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return f;
}

}  // namespace glhydro::cli
