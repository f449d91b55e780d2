#pragma once

#include "rann/analysis.hpp"
#include "rann/transport.hpp"

#include <vector>

namespace rann {

struct SnConfig {
  Index cells = 300;  // slab: uniform cells M (nodes M + 1)
  Index nx = 50;      // pin-cell cells per axis
  Index ny = 50;
  Index K = 200;      // slab: trapezoid ordinates on [-1, 1]
  Index n_phi = 16;   // pin-cell: azimuthal ordinates (periodic midpoint rule, multiple of 4)
  Index n_mu = 16;    // pin-cell: Gauss-Legendre polar ordinates
  int max_iterations = 20000;
  double tolerance = 1e-10;  // on max |Phi^{n+1} - Phi^n|

  void validate() const;
};

struct SnResult {
  ScalarFluxField field;
  int iterations = 0;
  double change = 0.0;  // final max |delta Phi|
  bool converged = false;
  /// Source-free problems with a nonzero kernel are iterated as a fundamental
  /// mode with Phi normalized to 1 at the slab centre each sweep.
  bool normalized = false;
  std::vector<double> history;  // max |delta Phi| per iteration
};

/// Upwind finite differences on M + 1 nodes, trapezoid ordinates, source
/// iteration. Throws std::runtime_error on non-convergence.
SnResult solve_slab_sn(const TransportProblem& problem, const SnConfig& config);

/// Step (upwind) finite volumes on a uniform nx x ny grid with
/// periodic-midpoint azimuths and Gauss-Legendre polar cosines; reflecting
/// faces use the mirrored ordinate from the previous sweep. Materials are
/// taken at cell centres. Throws std::runtime_error on non-convergence.
SnResult solve_pincell_sn(const TransportProblem& problem, const SnConfig& config);

}  // namespace rann
