#pragma once

#include "rann/quadrature.hpp"
#include "rann/solver.hpp"
#include "rann/transport.hpp"

#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rann {

struct ScalarFluxField {
  std::string problem;
  std::string angular_rule;  // human-readable description of the rule used
  Matrix grid;               // P x spatial_dim
  Matrix values;             // P x groups

  Index points() const { return grid.rows(); }
  int groups() const { return static_cast<int>(values.cols()); }
};

enum class RuleFamily { trapezoid, gauss_legendre };

std::string_view to_string(RuleFamily family);
RuleFamily rule_family_from_string(std::string_view name);

/// Tensor rule over the angular box of `domain` with K nodes per angular axis.
QuadratureRule angular_rule(const PhaseSpaceDomain& domain, Index K, RuleFamily family = RuleFamily::trapezoid);

/// Test grid over the spatial box: n points per axis including the endpoints
/// (slab) or n cell centres per axis (cylinder and pin-cell).
Matrix flux_grid(const PhaseSpaceDomain& domain, Index n);

/// Phi_g(r_i) = sum_k beta_k Psi_rho(r_i, Omega_k) for every group.
ScalarFluxField scalar_flux(const FluxSolution& solution, const Matrix& grid, const QuadratureRule& rule);

/// Angular integral of an arbitrary phase-space function at each grid point.
Vector integrate_angular(const std::function<double(std::span<const double>)>& psi, const Matrix& grid,
                         const QuadratureRule& rule);

/// sqrt(sum (p - r)^2 / sum r^2) over all points of one group, or of all
/// groups when group < 0.
double relative_l2_error(const ScalarFluxField& predicted, const ScalarFluxField& reference, int group = -1);

/// Reference values of the normalized slab scalar flux at x/b = 0, .25, .5, .75, 1.
inline constexpr std::array<double, 5> kSlabBenchmarkPositions{0.0, 0.25, 0.5, 0.75, 1.0};
inline constexpr std::array<double, 5> kSlabBenchmarkReference{1.0, 0.947144, 0.793726, 0.553290, 0.214192};

struct BenchmarkPoint {
  double x_over_b = 0.0;
  double value = 0.0;  // Phi(x) / Phi(0)
  double reference = 0.0;
  double error = 0.0;  // |value - reference| / reference
};

/// Normalized slab scalar flux against the tabulated reference.
std::vector<BenchmarkPoint> pointwise_benchmark_error(const FluxSolution& solution, const QuadratureRule& rule);

/// Same comparison for a field sampled on a slab grid; values are linearly
/// interpolated to the benchmark positions. `half_width` is b.
std::vector<BenchmarkPoint> pointwise_benchmark_error(const ScalarFluxField& field, double half_width);

struct ManufacturedCase {
  std::string id;
  /// Problem whose source is the derived Q = D Psi_ex + I Psi_ex.
  TransportProblem problem;
  std::function<double(std::span<const double>)> exact;         // Psi_ex(x, Omega)
  std::function<double(std::span<const double>)> exact_scalar;  // Phi_ex(r)
  /// Psi_ex factors as spatial(r) * angular(Omega); this is the integral of
  /// the angular factor by the 512-node reference rule.
  double angular_integral = 0.0;
};

/// "slab" (alias "a"): Psi = (b^2 - x^2)(2 + mu)/b^2 with the slab-critical
/// geometry, sigma_t = 5, sigma_s = 3 and no fission.
/// "pincell" (alias "b"): Psi = cos(pi x/2b) cos(pi y/2b)(2 + mu cos phi) on
/// the pin-cell box with the case-1 pin-cell data and vacuum faces.
ManufacturedCase make_manufactured_case(std::string_view id);

/// Exact scalar flux of a manufactured case on a grid.
ScalarFluxField exact_scalar_flux(const ManufacturedCase& mc, const Matrix& grid);

/// C_gr = [sigma_min^-2 + (1 + sigma_max / sigma_min)^2]^(1/2).
double graph_constant(double sigma_min, double sigma_max);

struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> value;
  /// Omega . grad_r Psi at a phase-space point.
  std::function<double(std::span<const double>)> streaming;
};

/// Closed-form functions with zero inflow trace on the spatial box of
/// `domain` (slab or pin-cell layout).
std::vector<TestFunction> zero_inflow_test_functions(const PhaseSpaceDomain& domain);

struct GraphNormReport {
  std::string label;
  std::string function;
  int group = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double c_gr = 0.0;
  double graph_norm = 0.0;     // ||Psi||_gr
  double operator_norm = 0.0;  // ||D Psi||
  double inflow_trace = 0.0;   // int over Gamma- of |n . Omega| Psi^2
  /// C_gr ||D Psi|| - ||Psi||_gr and (1 + sigma_max) ||Psi||_gr - ||D Psi||.
  double lower_margin = 0.0;
  double upper_margin = 0.0;

  bool holds(double slack = 1e-6) const { return lower_margin >= -slack && upper_margin >= -slack; }
};

/// Both norms by Gauss-Legendre tensor quadrature with K nodes per axis.
/// Throws std::invalid_argument when the inflow trace exceeds 1e-10.
GraphNormReport graph_norm_check(const PhaseSpaceDomain& domain, const CrossSections& xs, int group,
                                 const TestFunction& f, Index K);

struct GraphNormSuiteOptions {
  Index K_slab = 200;     // per axis on 2D phase spaces
  Index K_pincell = 40;   // per axis on the 4D pin-cell phase space
};

/// Every benchmark cross-section set (all groups) against every shipped test
/// function. Cylinder data are checked on the slab phase space over [0, R]
/// with the cylinder's radial regions.
std::vector<GraphNormReport> graph_norm_suite(const GraphNormSuiteOptions& options = {});

}  // namespace rann
