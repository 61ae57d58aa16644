#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "glhydro/experiments.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/io.hpp"

using namespace glhydro;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("glhydro_io_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(FormatDouble, RoundTripsWithSeventeenDigits) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(INFINITY), "inf");
}

TEST(CsvTable, WritesHeaderAndRows) {
  const auto dir = scratch("csv");
  CsvTable t({"a", "b"});
  t.row({"1", "2"}).row({"3", "4"});
  t.write(dir / "t.csv");
  EXPECT_EQ(read_lines(dir / "t.csv"), (std::vector<std::string>{"a,b", "1,2", "3,4"}));
}

TEST(FreeEnergyFile, CsvAndSidecar) {
  const auto dir = scratch("fe");
  const auto pot = Potential::quartic();
  const auto field = FieldSpec::two_point(0.5, 1);
  const auto block = realize_field(field, 3).values;
  const auto model = tabulate(pot, block, FreeEnergyKind::psi_K, uniform_grid(-1, 1, 5), 1e-9);
  write_free_energy(model, pot, field, 1e-9, dir / "psi_K.csv");
  const auto lines = read_lines(dir / "psi_K.csv");
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "m,value,d1,d2");
  std::istringstream row(lines[3]);
  std::string cell;
  std::getline(row, cell, ',');
  EXPECT_EQ(std::stod(cell), 0.0);
  std::getline(row, cell, ',');
  EXPECT_EQ(std::stod(cell), model.values()[2]);
  const auto side = nlohmann::json::parse(std::ifstream(dir / "psi_K.csv.json"));
  EXPECT_EQ(side.at("K").get<int>(), 3);
  EXPECT_TRUE(side.contains("tol"));
  EXPECT_TRUE(side.contains("potential"));
}

TEST(RunDirectory, WritesDocumentedSchema) {
  HydroScenario sc;
  sc.n_list = {16};
  sc.T = 0.02;
  sc.n_traj = 4;
  sc.checkpoints = 4;
  sc.bootstrap = 10;
  sc.fe_nodes = 11;
  const auto rec = run_theorem_bound_audit(sc);
  const auto dir = scratch("run");
  write_run_directory(rec, dir);
  for (const char* f : {"manifest.json", "series.csv", "rates.json", "inequalities.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto series = read_lines(dir / "series.csv");
  EXPECT_EQ(series[0].rfind("N,t,theta,theta_stderr,hminus1_sq,hminus1_stderr", 0), 0u);
  EXPECT_EQ(series.size(), 1u + 4u);
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("kind").get<std::string>(), "bound_audit");
  EXPECT_TRUE(manifest.contains("config"));
  EXPECT_TRUE(manifest.contains("seeds"));
  EXPECT_EQ(manifest.at("checkpoints").size(), 4u);
  const auto rates = nlohmann::json::parse(std::ifstream(dir / "rates.json"));
  EXPECT_TRUE(rates.is_object() || rates.is_array());
}
