#pragma once

#include "rann/assembly.hpp"
#include "rann/basis.hpp"
#include "rann/sketch.hpp"
#include "rann/transport.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rann {

struct LsqResult {
  Vector alpha;
  /// ||A alpha - F||^2 (plus lambda ||alpha||^2 when regularized), taken from
  /// the factorization.
  double residual = 0.0;
  Index rank = 0;
};

/// Least squares by Householder QR followed by a rank-revealing complete
/// orthogonal decomposition of the triangular factor; returns the
/// minimum-norm minimizer. lambda > 0 solves the stacked system [A; sqrt(lambda) I].
LsqResult solve_lsq(const Matrix& a, const Vector& f, double lambda = 0.0);
/// Factorizes `a` in place (no copy of the matrix is made).
LsqResult solve_lsq(Matrix&& a, const Vector& f, double lambda = 0.0);

Vector solve_lsq(const LinearSystem& system, double lambda = 0.0);

/// Strongly connected components of the graph g' -> g (sigma_{g'->g} > 0 in
/// some region, g != g'), in topological order. Groups are 0-based.
std::vector<std::vector<int>> multigroup_schedule(const std::vector<Matrix>& sigma_s);

struct SolverConfig {
  std::vector<Index> m{500};     // one entry, or one per subdomain
  std::vector<double> r{1.0};    // one entry, or one per subdomain
  std::uint64_t seed = 1;        // subdomain k uses seed + k
  CollocationCounts counts;
  std::optional<SketchSpec> sketch;
  double lambda = 0.0;
  Index chunk_rows = 2048;
  /// When set, each assembled (unsketched) system is written here with the
  /// block index appended.
  std::string dump_prefix;
};

struct BlockDiagnostics {
  std::vector<int> groups;
  Index rows = 0;
  Index cols = 0;
  Index solved_rows = 0;  // rows of the system handed to QR
  double residual = 0.0;
  double assembly_seconds = 0.0;
  double sketch_seconds = 0.0;
  double solve_seconds = 0.0;
  bool sketched = false;
  Index rank = 0;
};

struct FluxSolution {
  TransportProblem problem;
  std::vector<RandomFeatureBasis> bases;          // one per subdomain, shared by all groups
  std::vector<std::vector<Vector>> coefficients;  // [group][subdomain]
  std::vector<BlockDiagnostics> diagnostics;
  double collocation_seconds = 0.0;
  double total_seconds = 0.0;
};

std::vector<RandomFeatureBasis> build_bases(const TransportProblem& problem, const SolverConfig& config);

FluxSolution solve_problem(const TransportProblem& problem, const SolverConfig& config);

/// Psi_rho at phase-space points for one group. Local-network solutions use
/// the network of the region owning each point.
Vector evaluate_angular_flux(const FluxSolution& solution, const Matrix& points, int group = 0);

}  // namespace rann
