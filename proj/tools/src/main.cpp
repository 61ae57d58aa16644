#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "commands.hpp"
#include "glhydro/errors.hpp"
#include "glhydro/io.hpp"

namespace po = boost::program_options;
using namespace glhydro::cli;

namespace {

struct Flag {
  const char* name;
  const char* key;  ///< settings key the flag overrides
  const char* help;
};

const std::vector<Flag> kCommon{
    {"seed", "run.seed", "master seed (u64)"},
    {"threads", "run.threads", "worker threads; results do not depend on it"},
    {"tol", "run.tol", "quadrature tolerance (relative)"},
    {"pot", "potential.kind", "single-site potential: gaussian | quartic | perturbed_quartic"},
    {"amp", "potential.perturb_amp", "amplitude of the bounded perturbation"},
    {"field", "field.kind", "chemical potential law: zero | two_point | uniform | custom_discrete"},
    {"L", "field.L", "field bound |a| <= L"},
    {"atoms", "field.atoms", "custom atoms as value:prob,value:prob,..."},
    {"field-seed", "field.seed", "field realization seed (u64; empty uses --seed)"},
};

const std::vector<Flag> kHydro{
    {"N", "hydro.n_list", "lattice sizes, comma separated"},
    {"M", "hydro.m_list", "macro block counts per N (empty: nearest divisor of sqrt N)"},
    {"T", "hydro.T", "final time (macroscopic units)"},
    {"traj", "hydro.n_traj", "trajectories per (N, field seed)"},
    {"zeta0", "hydro.zeta0", "initial profile: zero | sine:AMP:MODE"},
    {"pde-grid", "hydro.pde_grid", "PDE cells (0: smallest multiple of lcm(N) >= 512)"},
    {"field-seeds", "hydro.field_seeds", "field seeds to sweep, comma separated"},
    {"checkpoints", "hydro.checkpoints", "number of recorded times in [0, T]"},
    {"dt", "hydro.sde_dt", "cap on the Euler-Maruyama step (macroscopic time)"},
    {"fe-nodes", "hydro.fe_nodes", "nodes of each psi_K tabulation"},
    {"bootstrap", "hydro.bootstrap", "bootstrap resamples for the slope interval"},
    {"exact-initial", "hydro.exact_initial", "start on N P^t eta0 without fluctuations (true/false)"},
};

struct Command {
  const char* name;
  const char* summary;
  std::vector<Flag> flags;
  std::function<int(Context&)> run;
};

std::vector<Command> commands() {
  std::vector<Command> c;
  c.push_back({"free-energy", "tabulate phi*, phi_K, psi_K and phi~ and write them as CSV",
               {{"k", "free_energy.K", "block size K (>= 1)"},
                {"m-min", "free_energy.m_min", "lower end of the m grid"},
                {"m-max", "free_energy.m_max", "upper end of the m grid"},
                {"m-nodes", "free_energy.m_nodes", "number of grid nodes"},
                {"sigma-min", "free_energy.sigma_min", "lower end of the sigma grid for phi*"},
                {"sigma-max", "free_energy.sigma_max", "upper end of the sigma grid for phi*"},
                {"convexity-min", "criteria.psi_convexity_min", "PASS threshold on min second derivative"}},
               cmd_free_energy});
  c.push_back({"cramer", "sweep K and measure sup_m |psi_K - phi_K|",
               {{"kmin", "cramer.k_min", "smallest K (>= 2)"},
                {"kmax", "cramer.k_max", "largest K (<= 16)"},
                {"m-min", "cramer.m_min", "lower end of the m grid"},
                {"m-max", "cramer.m_max", "upper end of the m grid"},
                {"m-nodes", "cramer.m_nodes", "number of grid nodes"},
                {"sigma-max", "cramer.sigma_max", "half-width of the sigma grid for the tilt variance check"},
                {"slope-min", "criteria.cramer_slope_min", "PASS window: lower slope"},
                {"slope-max", "criteria.cramer_slope_max", "PASS window: upper slope"},
                {"d2-fraction", "criteria.cramer_psi_d2_fraction", "required min psi_K'' / min phi_K''"},
                {"d2-from-k", "criteria.cramer_psi_d2_from_k", "K from which the fraction is required"}},
               cmd_cramer});
  c.push_back({"covariance", "estimate the covariance constant C0 on fibers",
               {{"K", "covariance.k_list", "block sizes (2 and/or 3), comma separated"},
                {"m", "covariance.m", "fiber mean"},
                {"family", "covariance.family", "test functions: fourier | gaussian_bump | hermite"},
                {"count", "covariance.count", "test functions per family"},
                {"grid", "covariance.grid", "fiber grid nodes per axis (0: automatic)"},
                {"ratio-max", "criteria.covariance_ratio_max", "PASS threshold on C0(last K)/C0(first K)"}},
               cmd_covariance});
  c.push_back({"gap", "spectral gap of the canonical-ensemble generator",
               {{"K", "gap.k_list", "block sizes (2 and/or 3), comma separated"},
                {"m", "gap.m_list", "fiber means, comma separated"},
                {"field-seeds", "gap.field_seeds", "field seeds, comma separated (empty: --field-seed)"},
                {"grid", "gap.grid", "initial nodes per axis for K = 2 (odd)"},
                {"grid3", "gap.grid3", "initial nodes per axis for K = 3 (odd)"},
                {"ratio-max", "criteria.gap_ratio_max", "PASS threshold on max/min gap"}},
               cmd_gap});
  auto sim = kHydro;
  c.push_back({"simulate", "Kawasaki ensembles with the Theta(t) bound audit", sim, cmd_simulate});
  auto hyd = kHydro;
  hyd.push_back({"slope-max", "criteria.hydro_slope_max", "PASS threshold on the log-log slope of D(N) (empty: skip)"});
  c.push_back({"hydrolimit", "H^-1 distance to the PDE solution as N grows", hyd, cmd_hydrolimit});
  return c;
}

void usage(std::ostream& os, const std::vector<Command>& cmds) {
  os << "usage: glhydro <command> [options]\n\ncommands:\n";
  for (const auto& c : cmds) os << "  " << c.name << std::string(14 - std::string(c.name).size(), ' ') << c.summary << '\n';
  os << "\nrun 'glhydro <command> --help' for the options of a command\n";
}

po::options_description describe(const Command& cmd, const Settings& defaults) {
  po::options_description desc(std::string("glhydro ") + cmd.name + " options");
  desc.add_options()("help,h", "show this help")
      ("config", po::value<std::string>(), "INI config file (flags override it)")
      ("out", po::value<std::string>()->default_value("out"), "output directory")
      ("verbose,v", "progress messages on stderr");
  auto add = [&](const Flag& f) {
    const std::string d = defaults.str(f.key);
    const std::string help = std::string(f.help) + " [" + f.key + ", default: " +
                             (d.empty() ? "none" : d) + "]";
    desc.add_options()(f.name, po::value<std::string>(), help.c_str());
  };
  for (const auto& f : kCommon) add(f);
  for (const auto& f : cmd.flags) add(f);
  return desc;
}

}  // namespace

int main(int argc, char** argv) {
  const auto cmds = commands();
  if (argc < 2) {
    usage(std::cerr, cmds);
    return 2;
  }
  const std::string name = argv[1];
  if (name == "--help" || name == "-h" || name == "help") {
    usage(std::cout, cmds);
    return 0;
  }
  if (name == "--version") {
    std::cout << "glhydro " << glhydro::version() << '\n';
    return 0;
  }
  const Command* cmd = nullptr;
  for (const auto& c : cmds) {
    if (name == c.name) cmd = &c;
  }
  if (!cmd) {
    std::cerr << "error: unknown command '" << name << "'\n";
    usage(std::cerr, cmds);
    return 2;
  }

  try {
    Context ctx;
    const auto desc = describe(*cmd, ctx.settings);
    po::variables_map vm;
    po::store(po::command_line_parser(argc - 1, argv + 1).options(desc).run(), vm);
    po::notify(vm);
    if (vm.count("help")) {
      std::cout << desc;
      return 0;
    }
    if (vm.count("config")) ctx.settings.load_file(vm["config"].as<std::string>());
    auto apply = [&](const Flag& f) {
      if (vm.count(f.name)) ctx.settings.set(f.key, vm[f.name].as<std::string>());
    };
    for (const auto& f : kCommon) apply(f);
    for (const auto& f : cmd->flags) apply(f);
    ctx.out = vm["out"].as<std::string>();
    ctx.verbose = vm.count("verbose") > 0;
    return cmd->run(ctx);
  } catch (const po::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const glhydro::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
