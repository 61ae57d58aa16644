#pragma once

#include <filesystem>
#include <iosfwd>

#include "settings.hpp"

namespace glhydro::cli {

/// Shared context of one subcommand invocation.
struct Context {
  Settings settings;
  std::filesystem::path out;
  bool verbose = false;
  std::ostream* report = nullptr;
};

/// Each returns the process exit code: 0 when every asserted criterion passes.
int cmd_free_energy(Context& ctx);
int cmd_cramer(Context& ctx);
int cmd_covariance(Context& ctx);
int cmd_gap(Context& ctx);
int cmd_simulate(Context& ctx);
int cmd_hydrolimit(Context& ctx);

}  // namespace glhydro::cli
