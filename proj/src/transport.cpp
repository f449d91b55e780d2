#include "rann/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rann {

namespace {

constexpr double kPi = std::numbers::pi;
// Regularized radius for the 1/x coefficient of the cylinder streaming term.
constexpr double kMinRadius = 1e-4;

void check_group(const CrossSections& xs, int g, const char* who) {
  if (g < 0 || g >= xs.groups)
    throw std::invalid_argument(std::string(who) + ": group " + std::to_string(g) + " out of range");
}

int region_at(const PhaseSpaceDomain& domain, const Matrix& points, Index i) {
  double p[2] = {points(i, 0), domain.spatial_dim() > 1 ? points(i, 1) : 0.0};
  return domain.region_of(std::span<const double>(p, 2));
}

void check_point_dim(const TransportProblem& problem, const Matrix& points, const char* who) {
  if (points.cols() != problem.domain.dim())
    throw std::invalid_argument(std::string(who) + ": points have " + std::to_string(points.cols()) +
                                " coordinates, geometry " + std::string(to_string(problem.kind())) +
                                " needs " + std::to_string(problem.domain.dim()));
}

// Sorted distinct values of one column of the rule's node matrix.
std::vector<double> distinct_nodes(const QuadratureRule& rule, Index col) {
  std::vector<double> v(rule.nodes.col(col).data(), rule.nodes.col(col).data() + rule.size());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool is_node(const std::vector<double>& nodes, double value) {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), value - 1e-12);
  return it != nodes.end() && std::abs(*it - value) <= 1e-12;
}

Matrix sigma_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

PhaseSpaceDomain pincell_domain(double half_width) {
  PhaseSpaceDomain d;
  d.kind = GeometryKind::pincell2d;
  d.spatial = {{-half_width, half_width}, {-half_width, half_width}};
  d.angular = {{0.0, 2.0 * kPi}, {-1.0, 1.0}};
  d.faces = {Face::x_lo, Face::x_hi, Face::y_lo, Face::y_hi};
  return d;
}

TransportProblem pincell_problem(const std::string& name, int config_case, bool reflecting) {
  constexpr double b = 0.63;
  constexpr double R = 0.54;
  TransportProblem p;
  p.name = name;
  p.length_unit = "cm";
  p.domain = pincell_domain(b);
  if (config_case == 3) {
    p.domain.regions = {{1, RegionShape::annulus, 0.27, R}, {2, RegionShape::complement, 0.0, 0.0}};
  } else {
    p.domain.regions = {{1, RegionShape::disk, 0.0, R}, {2, RegionShape::complement, 0.0, 0.0}};
  }
  p.xs.groups = 1;
  if (config_case == 1) {
    p.xs.sigma_t = {{1.25445}, {1.25445}};
    p.xs.sigma_s = {sigma_matrix({{1.12}}), sigma_matrix({{1.12}})};
  } else {
    p.xs.sigma_t = {{0.395168}, {1.25445}};
    p.xs.sigma_s = {sigma_matrix({{0.265802}}), sigma_matrix({{1.12}})};
  }
  p.source = [](std::span<const double>, int region, int) {
    return region == 1 ? 1.0 / (4.0 * kPi) : 0.0;
  };
  for (Face f : p.domain.faces) p.bc[f] = reflecting ? BoundaryKind::reflecting : BoundaryKind::vacuum;
  return p;
}

TransportProblem slab_critical() {
  constexpr double b = 0.6600527544;
  TransportProblem p;
  p.name = "slab-critical";
  p.length_unit = "m";
  p.domain.kind = GeometryKind::slab1d;
  p.domain.spatial = {{-b, b}};
  p.domain.angular = {{-1.0, 1.0}};
  p.domain.regions = {{1, RegionShape::interval, -b, b}};
  p.domain.faces = {Face::x_lo, Face::x_hi};
  p.xs.groups = 1;
  p.xs.sigma_t = {{5.0}};
  p.xs.sigma_s = {sigma_matrix({{3.0}})};
  p.xs.nu_sigma_f = {{2.25}};
  p.xs.k_eff = 1.0;
  p.source = [](std::span<const double>, int, int) { return 0.0; };
  p.bc = {{Face::x_lo, BoundaryKind::vacuum}, {Face::x_hi, BoundaryKind::vacuum}};
  p.anchors = {{{0.0, -1.0}, 0.2}, {{0.0, 1.0}, 0.2}};
  return p;
}

TransportProblem cylinder_problem(int config_case) {
  constexpr double R = 1.08225766;
  TransportProblem p;
  p.name = "cylinder-case" + std::to_string(config_case);
  p.length_unit = "m";
  p.domain.kind = GeometryKind::cylinder1d;
  p.domain.spatial = {{0.0, R}};
  p.domain.angular = {{0.0, 2.0 * kPi}, {-1.0, 1.0}};
  p.domain.faces = {Face::x_hi};
  p.xs.groups = 1;
  if (config_case == 1) {
    p.domain.regions = {{1, RegionShape::interval, 0.0, R}};
    p.xs.sigma_t = {{5.0}};
    p.xs.sigma_s = {sigma_matrix({{3.0}})};
  } else {
    p.domain.regions = {{1, RegionShape::interval, 0.0, 0.5 * R}, {2, RegionShape::interval, 0.5 * R, R}};
    p.domain.interfaces = {{0, 0, 0.5 * R, 1, 2}};
    p.xs.sigma_t = {{5.0}, {0.5}};
    p.xs.sigma_s = {sigma_matrix({{3.0}}), sigma_matrix({{0.3}})};
    p.local_networks = true;
  }
  // Q_f enters exactly as written, without a 1/(4 pi) factor.
  p.source = [R](std::span<const double> x, int, int) { return 0.2 * std::cos(kPi * x[0] / (2.0 * R)); };
  p.bc = {{Face::x_hi, BoundaryKind::vacuum}};
  return p;
}

TransportProblem pincell_7g() {
  TransportProblem p;
  p.name = "pincell-7g";
  p.length_unit = "cm";
  p.domain = pincell_domain(0.63);
  p.domain.regions = {{1, RegionShape::disk, 0.0, 0.54}, {2, RegionShape::complement, 0.0, 0.0}};
  p.xs.groups = 7;
  p.xs.sigma_t = {
      {3.558980e-1, 6.596100e-1, 9.607760e-1, 1.108734e-0, 6.236020e-1, 7.903360e-1, 1.128812e-0},
      {3.184120e-1, 8.259400e-1, 1.180620e-0, 1.168700e-0, 1.436000e-0, 2.508900e-0, 5.300760e-0}};
  p.xs.sigma_s = {
      sigma_matrix({{1.27537e-1, 4.37800e-2, 9.43740e-6, 5.51630e-9, 0, 0, 0},
                    {0, 3.24456e-1, 1.63140e-3, 3.14270e-9, 0, 0, 0},
                    {0, 0, 4.50940e-1, 2.67920e-3, 0, 0, 0},
                    {0, 0, 0, 4.52565e-1, 5.56640e-3, 0, 0},
                    {0, 0, 0, 1.25250e-4, 2.71401e-1, 1.02550e-2, 1.00210e-8},
                    {0, 0, 0, 0, 1.29680e-3, 2.65802e-1, 1.68090e-2},
                    {0, 0, 0, 0, 0, 8.54580e-3, 2.73080e-1}}),
      sigma_matrix({{4.44777e-2, 1.13400e-1, 7.23470e-4, 3.74990e-6, 5.31840e-8, 0, 0},
                    {0, 2.82334e-1, 1.29940e-1, 6.23400e-4, 4.80020e-5, 7.44860e-6, 1.04550e-6},
                    {0, 0, 3.45256e-1, 2.24570e-1, 1.69990e-2, 2.64430e-3, 5.03440e-4},
                    {0, 0, 0, 9.10284e-2, 4.15510e-1, 6.37320e-2, 1.21390e-2},
                    {0, 0, 0, 7.14370e-5, 1.39138e-1, 5.11820e-1, 6.12290e-2},
                    {0, 0, 0, 0, 2.21570e-3, 6.99913e-1, 5.37320e-1},
                    {0, 0, 0, 0, 0, 1.32440e-1, 2.48070e-0}})};
  // Unit fuel source in every group, zero in the moderator.
  p.source = [](std::span<const double>, int region, int) {
    return region == 1 ? 1.0 / (4.0 * kPi) : 0.0;
  };
  for (Face f : p.domain.faces) p.bc[f] = BoundaryKind::reflecting;
  return p;
}

}  // namespace

double CrossSections::total(int region, int group) const {
  return sigma_t.at(static_cast<std::size_t>(region - 1)).at(static_cast<std::size_t>(group));
}

double CrossSections::transfer(int region, int from_group, int to_group) const {
  const auto r = static_cast<std::size_t>(region - 1);
  double v = sigma_s.at(r)(from_group, to_group);
  if (groups == 1 && !nu_sigma_f.empty()) v += nu_sigma_f.at(r).at(0) / k_eff;
  return v;
}

double CrossSections::min_total(int group) const {
  double v = total(1, group);
  for (int r = 2; r <= regions(); ++r) v = std::min(v, total(r, group));
  return v;
}

double CrossSections::max_total(int group) const {
  double v = total(1, group);
  for (int r = 2; r <= regions(); ++r) v = std::max(v, total(r, group));
  return v;
}

void CrossSections::validate() const {
  if (groups < 1) throw std::invalid_argument("cross sections: need at least one group");
  if (sigma_t.empty() || sigma_s.size() != sigma_t.size())
    throw std::invalid_argument("cross sections: region count mismatch between sigma_t and sigma_s");
  if (!nu_sigma_f.empty() && nu_sigma_f.size() != sigma_t.size())
    throw std::invalid_argument("cross sections: region count mismatch for nu_sigma_f");
  if (!(k_eff > 0.0)) throw std::invalid_argument("cross sections: k_eff must be positive");
  for (std::size_t r = 0; r < sigma_t.size(); ++r) {
    if (static_cast<int>(sigma_t[r].size()) != groups)
      throw std::invalid_argument("cross sections: sigma_t group count mismatch");
    for (double v : sigma_t[r])
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("cross sections: sigma_t must be positive");
    if (sigma_s[r].rows() != groups || sigma_s[r].cols() != groups)
      throw std::invalid_argument("cross sections: scattering matrix must be G x G");
    if ((sigma_s[r].array() < 0.0).any() || !sigma_s[r].allFinite())
      throw std::invalid_argument("cross sections: negative scattering entry");
    if (!nu_sigma_f.empty())
      for (double v : nu_sigma_f[r])
        if (v < 0.0) throw std::invalid_argument("cross sections: negative nu_sigma_f");
  }
}

double TransportProblem::kernel_norm() const {
  return kind() == GeometryKind::slab1d ? 0.5 : 1.0 / (4.0 * kPi);
}

double TransportProblem::source_at(std::span<const double> point, int group) const {
  if (!source) return 0.0;
  return source(point, domain.region_of(point), group);
}

void TransportProblem::validate() const {
  domain.validate();
  xs.validate();
  for (const auto& r : domain.regions)
    if (r.id < 1 || r.id > xs.regions())
      throw std::invalid_argument("problem " + name + ": region id " + std::to_string(r.id) +
                                  " has no cross sections");
  for (Face f : domain.faces) {
    auto it = bc.find(f);
    if (it == bc.end() || it->second == BoundaryKind::untagged)
      throw std::invalid_argument("problem " + name + ": face " + std::string(to_string(f)) +
                                  " has no boundary condition");
  }
  if (local_networks && domain.interfaces.empty())
    throw std::invalid_argument("problem " + name + ": local networks need at least one interface");
  for (const auto& a : anchors)
    if (static_cast<Index>(a.point.size()) != domain.dim())
      throw std::invalid_argument("problem " + name + ": anchor dimension mismatch");
}

Matrix streaming_rows(const TransportProblem& problem, const RandomFeatureBasis& basis,
                      const Matrix& points, int group) {
  check_point_dim(problem, points, "streaming_rows");
  check_group(problem.xs, group, "streaming_rows");
  const Index n = points.rows();
  const Index d = points.cols();
  // coef(i, a): coefficient of d/dx_a in Omega . grad at point i.
  Matrix coef = Matrix::Zero(n, d);
  Vector sigma(n);
  for (Index i = 0; i < n; ++i) {
    sigma(i) = problem.xs.total(region_at(problem.domain, points, i), group);
    switch (problem.kind()) {
      case GeometryKind::slab1d:
        coef(i, 0) = points(i, 1);
        break;
      case GeometryKind::cylinder1d: {
        const double x = std::max(points(i, 0), kMinRadius);
        const double phi = points(i, 1);
        const double s = std::sqrt(std::max(0.0, 1.0 - points(i, 2) * points(i, 2)));
        coef(i, 0) = s * std::cos(phi);
        coef(i, 1) = -s * std::sin(phi) / x;
        break;
      }
      case GeometryKind::pincell2d: {
        const double phi = points(i, 2);
        const double s = std::sqrt(std::max(0.0, 1.0 - points(i, 3) * points(i, 3)));
        coef(i, 0) = s * std::cos(phi);
        coef(i, 1) = s * std::sin(phi);
        break;
      }
    }
  }
  BasisJet jet = eval_basis_jet(basis, points);
  Matrix out = jet.slope.cwiseProduct(coef * basis.weights().transpose());
  out += sigma.asDiagonal() * jet.value;
  return out;
}

Matrix angular_moments(const RandomFeatureBasis& basis, const Matrix& points, Index spatial_dim,
                       const QuadratureRule& angular_rule) {
  if (points.cols() != spatial_dim + angular_rule.dim())
    throw std::invalid_argument("angular_moments: point dimension does not match spatial + angular rule");
  const Index n = points.rows();
  const Index m = basis.size();
  const Index K = angular_rule.size();

  // Runs of consecutive points sharing a spatial location.
  std::vector<Index> starts;
  for (Index i = 0; i < n; ++i) {
    if (i == 0 || (points.row(i).head(spatial_dim) - points.row(i - 1).head(spatial_dim)).cwiseAbs().maxCoeff() != 0.0)
      starts.push_back(i);
  }
  starts.push_back(n);

  Matrix out(n, m);
  const auto runs = static_cast<long>(starts.size()) - 1;
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < runs; ++r) {
    const Index i0 = starts[static_cast<std::size_t>(r)];
    const Index i1 = starts[static_cast<std::size_t>(r) + 1];
    Matrix slice(K, points.cols());
    slice.leftCols(spatial_dim) = points.row(i0).head(spatial_dim).replicate(K, 1);
    slice.rightCols(angular_rule.dim()) = angular_rule.nodes;
    const Eigen::RowVectorXd moment = angular_rule.weights.transpose() * eval_basis(basis, slice);
    for (Index i = i0; i < i1; ++i) out.row(i) = moment;
  }
  return out;
}

void check_angular_nodes(const Matrix& points, Index spatial_dim, const QuadratureRule& rule) {
  if (points.cols() != spatial_dim + rule.dim())
    throw std::invalid_argument("angular rule dimension does not match the points");
  for (Index a = 0; a < rule.dim(); ++a) {
    const auto nodes = distinct_nodes(rule, a);
    for (Index i = 0; i < points.rows(); ++i)
      if (!is_node(nodes, points(i, spatial_dim + a)))
        throw std::invalid_argument("angular coordinate of point " + std::to_string(i) +
                                    " is not a quadrature node (rule/grid mismatch)");
  }
}

Matrix scattering_rows(const TransportProblem& problem, const RandomFeatureBasis& basis,
                       const Matrix& points, const QuadratureRule& angular_rule, int from_group,
                       int to_group) {
  check_point_dim(problem, points, "scattering_rows");
  check_group(problem.xs, from_group, "scattering_rows");
  check_group(problem.xs, to_group, "scattering_rows");
  const Index sd = problem.domain.spatial_dim();
  if (angular_rule.dim() != problem.domain.angular_dim())
    throw std::invalid_argument("scattering_rows: angular rule dimension mismatch");
  check_angular_nodes(points, sd, angular_rule);
  const Index n = points.rows();
  Vector coef(n);
  bool any = false;
  for (Index i = 0; i < n; ++i) {
    coef(i) = -problem.kernel_norm() *
              problem.xs.transfer(region_at(problem.domain, points, i), from_group, to_group);
    any = any || coef(i) != 0.0;
  }
  if (!any) return Matrix::Zero(n, basis.size());
  return coef.asDiagonal() * angular_moments(basis, points, sd, angular_rule);
}

Matrix boundary_rows(const TransportProblem& problem, const RandomFeatureBasis& basis,
                     const BoundaryBlock& block) {
  check_point_dim(problem, block.points, "boundary_rows");
  const Index n = block.size();
  const Index sd = problem.domain.spatial_dim();
  std::vector<Index> reflecting;
  for (Index i = 0; i < n; ++i) {
    const BoundaryKind tag = block.tags.at(static_cast<std::size_t>(i));
    if (tag == BoundaryKind::untagged)
      throw std::invalid_argument("boundary_rows: boundary point " + std::to_string(i) + " is untagged");
    if (tag == BoundaryKind::reflecting) reflecting.push_back(i);
  }
  Matrix out = eval_basis(basis, block.points);
  if (!reflecting.empty()) {
    Matrix mirrored(static_cast<Index>(reflecting.size()), block.points.cols());
    for (std::size_t k = 0; k < reflecting.size(); ++k) {
      const Index i = reflecting[k];
      mirrored.row(static_cast<Index>(k)) = block.points.row(i);
      if (problem.kind() == GeometryKind::slab1d) {
        mirrored(static_cast<Index>(k), 1) = -block.points(i, 1);
      } else {
        const auto [phi_r, mu_r] = reflect_direction(block.normals.row(i).transpose(), block.points(i, sd),
                                                     block.points(i, sd + 1));
        mirrored(static_cast<Index>(k), sd) = phi_r;
        mirrored(static_cast<Index>(k), sd + 1) = mu_r;
      }
    }
    const Matrix mirrored_values = eval_basis(basis, mirrored);
    for (std::size_t k = 0; k < reflecting.size(); ++k)
      out.row(reflecting[k]) -= mirrored_values.row(static_cast<Index>(k));
  }
  return block.trace_weights.cwiseSqrt().asDiagonal() * out;
}

Vector rhs_vector(const TransportProblem& problem, const Matrix& points, int group) {
  check_point_dim(problem, points, "rhs_vector");
  check_group(problem.xs, group, "rhs_vector");
  Vector f(points.rows());
  std::vector<double> p(static_cast<std::size_t>(points.cols()));
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index a = 0; a < points.cols(); ++a) p[static_cast<std::size_t>(a)] = points(i, a);
    f(i) = problem.source_at(p, group);
  }
  return f;
}

CollocationSet make_collocation(const TransportProblem& problem, const CollocationCounts& counts) {
  PhaseSpaceDomain domain = problem.domain;
  if (!problem.local_networks) domain.interfaces.clear();
  CollocationSet set = build_collocation(domain, counts);
  for (Index i = 0; i < set.boundary.size(); ++i) {
    const Face f = set.boundary.faces[static_cast<std::size_t>(i)];
    auto it = problem.bc.find(f);
    if (it == problem.bc.end())
      throw std::invalid_argument("make_collocation: face " + std::string(to_string(f)) + " has no boundary condition");
    set.boundary.tags[static_cast<std::size_t>(i)] = it->second;
  }
  if (!problem.anchors.empty()) {
    set.anchors.points.resize(static_cast<Index>(problem.anchors.size()), problem.domain.dim());
    set.anchors.values.resize(static_cast<Index>(problem.anchors.size()));
    for (std::size_t k = 0; k < problem.anchors.size(); ++k) {
      for (Index a = 0; a < problem.domain.dim(); ++a)
        set.anchors.points(static_cast<Index>(k), a) = problem.anchors[k].point[static_cast<std::size_t>(a)];
      set.anchors.values(static_cast<Index>(k)) = problem.anchors[k].value;
    }
  }
  return set;
}

std::vector<std::string> builtin_problem_names() {
  return {"slab-critical",      "cylinder-case1",     "cylinder-case2",     "pincell-vac-case1",
          "pincell-vac-case2",  "pincell-vac-case3",  "pincell-refl-case1", "pincell-refl-case2",
          "pincell-refl-case3", "pincell-7g"};
}

TransportProblem builtin_problem(std::string_view name) {
  TransportProblem p;
  if (name == "slab-critical") {
    p = slab_critical();
  } else if (name == "cylinder-case1") {
    p = cylinder_problem(1);
  } else if (name == "cylinder-case2") {
    p = cylinder_problem(2);
  } else if (name == "pincell-7g") {
    p = pincell_7g();
  } else if (name.starts_with("pincell-vac-case") || name.starts_with("pincell-refl-case")) {
    const bool refl = name.starts_with("pincell-refl-case");
    const std::string_view tail = name.substr(refl ? 17 : 16);
    if (tail != "1" && tail != "2" && tail != "3") throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
    p = pincell_problem(std::string(name), tail[0] - '0', refl);
  } else {
    throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
  }
  p.validate();
  return p;
}

}  // namespace rann
