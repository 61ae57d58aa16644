#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "glhydro/field.hpp"
#include "glhydro/potential.hpp"

namespace glhydro::cli {

/// Usage problems (bad flags, unknown keys, missing files): exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resolved configuration: built-in defaults, then the config file, then flags.
/// Keys are "section.name"; unknown keys are rejected.
class Settings {
 public:
  Settings();

  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;
  std::vector<std::uint64_t> u64_list(const std::string& key) const;

  const std::map<std::string, std::string>& all() const noexcept { return values_; }

  Potential potential() const;
  /// Field law with its realization seed (field.seed, or run.seed when empty).
  FieldSpec field() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace glhydro::cli
