#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glhydro/experiments.hpp"
#include "glhydro/field.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/potential.hpp"

namespace glhydro {

/// Library version string.
std::string version();

/// Shortest round-trip text is not required; every float is written with 17
/// significant digits.
std::string format_double(double v);

/// Minimal CSV table: a header and rows of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> cells);
  void write(const std::filesystem::path& path) const;
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes the tabulation as CSV (m, value, d1, d2) plus a JSON sidecar
/// `<path>.json` with potential, field atoms, K and tol.
void write_free_energy(const FreeEnergyModel& model, const Potential& pot, const FieldSpec& field,
                       double tol, const std::filesystem::path& path);

/// Run directory: manifest.json, series.csv, rates.json, inequalities.csv.
void write_run_directory(const RunRecord& record, const std::filesystem::path& dir);

}  // namespace glhydro
