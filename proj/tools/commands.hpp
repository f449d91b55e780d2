#pragma once

#include "run_config.hpp"

#include "rann/analysis.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace rann::cli {

/// Exclusive claim on an output directory; the lockfile is removed on
/// destruction. Throws when another run holds the directory.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& directory);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Relative l2 error of `predicted` against `reference`. Grids must match,
/// except 1D fields, where the reference is linearly interpolated.
double compare_fields(const ScalarFluxField& predicted, const ScalarFluxField& reference, int group = -1);

/// Same after scaling each one-group 1D field by its value at x = 0.
double normalized_l2_error(const ScalarFluxField& predicted, const ScalarFluxField& reference);

/// Scalar-flux error of a manufactured-case solve on the config's grid.
double manufactured_error(const ManufacturedCase& mc, const FluxSolution& solution, const RunConfig& config);

// Each command writes its artifacts under config.output and returns the exit
// status. `log` receives short progress lines.
int run_solve(const RunConfig& config, std::ostream& log);
int run_baseline(const RunConfig& config, std::ostream& log);
int run_verify(const RunConfig& config, std::ostream& log);
int run_compare(const RunConfig& config, std::ostream& log);

}  // namespace rann::cli
