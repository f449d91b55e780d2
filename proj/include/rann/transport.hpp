#pragma once

#include "rann/basis.hpp"
#include "rann/geometry.hpp"
#include "rann/quadrature.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rann {

/// Region-wise constant multigroup data. Regions and groups are indexed
/// 1-based in the accessors to match region ids; storage is 0-based.
struct CrossSections {
  int groups = 1;
  std::vector<std::vector<double>> sigma_t;     // [region][group]
  std::vector<Matrix> sigma_s;                  // [region](g', g) = sigma_{s, g' -> g}
  std::vector<std::vector<double>> nu_sigma_f;  // [region][group]; empty without fission
  double k_eff = 1.0;

  int regions() const { return static_cast<int>(sigma_t.size()); }
  double total(int region, int group) const;
  /// Isotropic transfer coefficient g' -> g. For one-group data with fission
  /// the production term nu_sigma_f / k_eff is folded into the kernel.
  double transfer(int region, int from_group, int to_group) const;
  double min_total(int group) const;
  double max_total(int group) const;
  void validate() const;
};

/// Source Q_g evaluated at a full phase-space point, with any isotropy factor
/// already applied. Groups are 0-based.
using SourceFunction = std::function<double(std::span<const double> point, int region, int group)>;

struct Anchor {
  std::vector<double> point;
  double value = 0.0;
};

struct TransportProblem {
  std::string name;
  PhaseSpaceDomain domain;
  CrossSections xs;
  SourceFunction source;
  std::map<Face, BoundaryKind> bc;
  /// Point-value normalization rows (used by the critical slab).
  std::vector<Anchor> anchors;
  /// One network per region, coupled by interface rows.
  bool local_networks = false;
  /// Length unit of the coordinates ("m" or "cm").
  std::string length_unit = "cm";

  GeometryKind kind() const { return domain.kind; }
  int groups() const { return xs.groups; }
  /// Normalization of the isotropic kernel: 1/2 for the slab, 1/(4 pi) otherwise.
  double kernel_norm() const;
  double source_at(std::span<const double> point, int group) const;
  void validate() const;
};

/// Rows (D psi_j)(x_i) for the streaming-absorption operator of `group`.
Matrix streaming_rows(const TransportProblem& problem, const RandomFeatureBasis& basis,
                      const Matrix& points, int group = 0);

/// N x m matrix of sum_k beta_k psi_j(r_i, Omega_k): the angular quadrature of
/// each basis function through the spatial location of each point. Runs of
/// consecutive points sharing a spatial location are evaluated once.
Matrix angular_moments(const RandomFeatureBasis& basis, const Matrix& points, Index spatial_dim,
                       const QuadratureRule& angular_rule);

/// Throws unless the angular coordinates of every point are nodes of `rule`.
void check_angular_nodes(const Matrix& points, Index spatial_dim, const QuadratureRule& rule);

/// Rows -norm * sigma_{g'->g}(r_i) * sum_k beta_k psi_j(r_i, Omega_k). The
/// angular coordinates of every point must be nodes of `angular_rule`.
Matrix scattering_rows(const TransportProblem& problem, const RandomFeatureBasis& basis,
                       const Matrix& points, const QuadratureRule& angular_rule, int from_group = 0,
                       int to_group = 0);

/// Rows sqrt(omega) * (B psi_j)(x_i) for a tagged boundary block.
Matrix boundary_rows(const TransportProblem& problem, const RandomFeatureBasis& basis,
                     const BoundaryBlock& block);

/// F_i = Q_g(x_i).
Vector rhs_vector(const TransportProblem& problem, const Matrix& points, int group = 0);

/// Collocation set with boundary tags and anchors taken from the problem.
/// Interface blocks are generated only for local-network problems.
CollocationSet make_collocation(const TransportProblem& problem, const CollocationCounts& counts);

/// Names accepted by builtin_problem.
std::vector<std::string> builtin_problem_names();

TransportProblem builtin_problem(std::string_view name);

}  // namespace rann
