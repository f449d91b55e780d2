#include <doctest.h>

#include "commands.hpp"
#include "run_config.hpp"

#include "rann/flux_csv.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rann;
using namespace rann::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(RANN_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rann_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("config parsing") {
  const fs::path dir = scratch("config");
  const auto good = write_file(dir, "good.ini",
                               "[run]\nproblem = pincell-vac-case2\n; comment\n[method]\nm = 300\nr = 2.5\n"
                               "[desk]\nmethod.m = 40\n");
  RunConfig c = load_config(good.string(), false);
  CHECK(c.m == std::vector<Index>{300});
  CHECK(c.r == std::vector<double>{2.5});
  resolve(c);
  CHECK(c.interior == std::vector<Index>{15, 15, 15, 15});
  CHECK(c.boundary == std::vector<Index>{15, 15, 15});
  CHECK(c.grid == 50);
  CHECK(load_config(good.string(), true).m == std::vector<Index>{40});

  auto error_of = [&](const std::string& text) {
    const auto p = write_file(dir, "bad.ini", text);
    try {
      RunConfig bad = load_config(p.string(), false);
      resolve(bad);
    } catch (const std::exception& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("[method]\nmu = 3\n").find("method.mu") != std::string::npos);
  CHECK(error_of("[method]\nm = -3\n").find("method.m") != std::string::npos);
  CHECK(error_of("[bogus]\nm = 3\n").find("bogus") != std::string::npos);
  CHECK(error_of("m = 3\n") != "");
  CHECK(error_of("[desk]\nmethod.q = 1\n").find("method.q") != std::string::npos);
  CHECK(error_of("[evaluation]\nrule = simpson\n").find("evaluation.rule") != std::string::npos);
  CHECK(error_of("[run]\nproblem = nowhere\n") != "");

  RunConfig slab;
  resolve(slab);
  CHECK(slab.interior == std::vector<Index>{50, 50});
  CHECK(slab.boundary == std::vector<Index>{500});
  CHECK(slab.grid == 101);

  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    INFO(entry.path().string());
    for (bool desk : {false, true}) {
      RunConfig shipped = load_config(entry.path().string(), desk);
      CHECK_NOTHROW(resolve(shipped));
    }
  }
}

TEST_CASE("flux csv round trip keeps every bit") {
  const fs::path dir = scratch("csv");
  ScalarFluxField f;
  f.grid = Matrix(3, 2);
  f.grid << 0.1, 0.2, 1.0 / 3.0, -2.0, 1e-300, 7.0;
  f.values = Matrix(3, 2);
  f.values << 1.0 / 7.0, -0.0, 6.02214076e23, 2.0 / 3.0, 5e-324, -1.0;
  write_flux_csv(f, (dir / "f.csv").string());
  const ScalarFluxField g = read_flux_csv((dir / "f.csv").string());
  CHECK(g.grid == f.grid);
  CHECK(g.values == f.values);
  CHECK(flux_csv_string(f).rfind("x,y,group,phi\n", 0) == 0);

  ScalarFluxField one;
  one.grid = Vector::LinSpaced(2, 0.0, 1.0);
  one.values = Vector::Ones(2);
  CHECK(flux_csv_string(one) == "x,phi\n0.0000000000000000e+00,1.0000000000000000e+00\n"
                                "1.0000000000000000e+00,1.0000000000000000e+00\n");
  CHECK_THROWS(read_flux_csv((dir / "missing.csv").string()));
}

TEST_CASE("solve, baseline and compare commands") {
  const fs::path dir = scratch("run");
  RunConfig c = load_config((kConfigs / "slab-critical.ini").string(), false);
  c.m = {150};
  c.interior = {30, 30};
  c.boundary = {100};
  c.sn.cells = 100;
  c.sn.K = 64;
  c.output = (dir / "rann").string();
  resolve(c);
  std::ostringstream log;
  REQUIRE(run_solve(c, log) == 0);
  const auto report = read_json(dir / "rann" / "report.json");
  REQUIRE(report.at("benchmark").size() == 5);
  CHECK(report.at("benchmark")[0].at("error").get<double>() == 0.0);
  CHECK(report.at("seed").get<std::uint64_t>() == 1);

  c.output = (dir / "sn").string();
  REQUIRE(run_baseline(c, log) == 0);
  CHECK(read_json(dir / "sn" / "report.json").at("converged").get<bool>());

  RunConfig cmp;
  cmp.output = (dir / "cmp").string();
  cmp.predicted = (dir / "rann" / "flux.csv").string();
  cmp.compare_reference = cmp.predicted;
  REQUIRE(run_compare(cmp, log) == 0);
  CHECK(read_json(dir / "cmp" / "compare.json").at("comparison").at("relative_l2").get<double>() == 0.0);

  cmp.compare_reference = (dir / "sn" / "sn_flux.csv").string();
  REQUIRE(run_compare(cmp, log) == 0);
  const auto j = read_json(dir / "cmp" / "compare.json").at("comparison");
  CHECK(j.at("normalized_relative_l2").get<double>() < 1e-2);

  const ScalarFluxField a = read_flux_csv(cmp.predicted);
  CHECK(compare_fields(a, a) == 0.0);
  ScalarFluxField scaled = a;
  scaled.values *= 4.0;
  CHECK(normalized_l2_error(scaled, a) < 1e-14);
}

TEST_CASE("output lock") {
  const fs::path dir = scratch("lock");
  {
    OutputLock first(dir);
    CHECK(fs::exists(dir / ".rann.lock"));
    CHECK_THROWS_WITH_AS(OutputLock{dir}, doctest::Contains("in use"), std::runtime_error);
  }
  CHECK_FALSE(fs::exists(dir / ".rann.lock"));
  CHECK_NOTHROW(OutputLock{dir});
}
