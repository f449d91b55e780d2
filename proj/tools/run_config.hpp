#pragma once

#include "rann/baseline.hpp"
#include "rann/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace rann::cli {

/// Every key of the run configuration file. Sections: run, method,
/// collocation, sketch, evaluation, baseline, verify, compare; a [desk]
/// section holds `section.key = value` overrides applied by --desk.
struct RunConfig {
  // [run]
  std::string problem = "slab-critical";
  std::string output = "out";
  std::string reference;    // optional flux CSV compared against the result
  std::string dump_prefix;  // optional binary dump of assembled systems

  // [method]
  std::vector<Index> m{500};
  std::vector<double> r{1.0};
  std::uint64_t seed = 1;
  double lambda = 0.0;
  Index chunk_rows = 2048;

  // [collocation]; empty lists take per-geometry defaults
  std::vector<Index> interior;
  std::vector<Index> boundary;
  std::vector<Index> interface;

  // [sketch]
  bool sketch = false;
  Index d_S = 2;
  Index n_S = 8;
  std::uint64_t sketch_seed = 0;

  // [evaluation]
  Index grid = 0;  // 0: 101 points (1D) or 50 x 50 cells (2D)
  Index angular_nodes = 64;
  std::string rule = "trapezoid";

  // [baseline]
  SnConfig sn;

  // [verify]
  Index mms_slab_m = 400;
  double mms_slab_r = 10.0;
  Index mms_slab_points = 50;
  double mms_slab_tolerance = 1e-4;
  bool mms_pincell = false;
  Index mms_pincell_m = 2000;
  double mms_pincell_r = 1.0;
  Index mms_pincell_points = 15;
  double mms_pincell_tolerance = 1e-2;
  Index graph_K_slab = 200;
  Index graph_K_pincell = 40;

  // [compare]
  std::string predicted;
  std::string compare_reference;
};

/// Parses an INI file; unknown sections or keys are errors naming the key.
RunConfig load_config(const std::string& path, bool desk);

/// Applies one `section.key = value` assignment.
void set_key(RunConfig& config, const std::string& dotted_key, const std::string& value);

/// Fills geometry-dependent defaults (collocation counts, evaluation grid).
void resolve(RunConfig& config);

/// Echo of every key, defaults included.
nlohmann::json to_json(const RunConfig& config);

/// Builtin benchmark or manufactured problem named by `config.problem`.
TransportProblem make_problem(const RunConfig& config);

SolverConfig solver_config(const RunConfig& config);

}  // namespace rann::cli
