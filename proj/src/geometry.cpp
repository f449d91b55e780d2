#include "rann/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rann {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double lo, double hi, Index n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = 0.5 * (lo + hi);
    return v;
  }
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + h * static_cast<double>(i);
  v.back() = hi;
  return v;
}

// Calls fn(idx) for every multi-index of a tensor grid, last axis fastest.
template <class Fn>
void for_each_index(const std::vector<Index>& counts, Fn&& fn) {
  std::vector<Index> idx(counts.size(), 0);
  Index total = 1;
  for (Index c : counts) total *= c;
  for (Index n = 0; n < total; ++n) {
    fn(idx);
    for (std::size_t a = counts.size(); a-- > 0;) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
}

int face_axis(Face face) { return (face == Face::x_lo || face == Face::x_hi) ? 0 : 1; }

bool face_is_low(Face face) { return face == Face::x_lo || face == Face::y_lo; }

// Angular interval sampled on a face's inflow set. For the slab the restricted
// coordinate is mu, otherwise phi (with [-pi/2, pi/2] wrapped into [0, 2 pi)).
Interval inflow_sector(GeometryKind kind, Face face) {
  if (kind == GeometryKind::slab1d) return face == Face::x_lo ? Interval{0.0, 1.0} : Interval{-1.0, 0.0};
  switch (face) {
    case Face::x_lo: return {-0.5 * kPi, 0.5 * kPi};
    case Face::x_hi: return {0.5 * kPi, 1.5 * kPi};
    case Face::y_lo: return {0.0, kPi};
    case Face::y_hi: return {kPi, 2.0 * kPi};
  }
  throw std::invalid_argument("unknown face");
}

double point_trace_weight(GeometryKind kind, const Eigen::Vector3d& normal,
                          std::span<const double> point, Index spatial_dim) {
  if (kind == GeometryKind::slab1d) return slab_trace_weight(point[1]);
  return trace_weight(normal, point[static_cast<std::size_t>(spatial_dim)],
                      point[static_cast<std::size_t>(spatial_dim) + 1]);
}

}  // namespace

std::string_view to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::slab1d: return "slab1d";
    case GeometryKind::cylinder1d: return "cylinder1d";
    case GeometryKind::pincell2d: return "pincell2d";
  }
  return "?";
}

std::string_view to_string(Face face) {
  switch (face) {
    case Face::x_lo: return "x_lo";
    case Face::x_hi: return "x_hi";
    case Face::y_lo: return "y_lo";
    case Face::y_hi: return "y_hi";
  }
  return "?";
}

std::string_view to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::untagged: return "untagged";
    case BoundaryKind::vacuum: return "vacuum";
    case BoundaryKind::reflecting: return "reflecting";
  }
  return "?";
}

Face face_from_string(std::string_view name) {
  if (name == "x_lo") return Face::x_lo;
  if (name == "x_hi") return Face::x_hi;
  if (name == "y_lo") return Face::y_lo;
  if (name == "y_hi") return Face::y_hi;
  throw std::invalid_argument("unknown face id '" + std::string(name) + "'");
}

bool RegionDescriptor::contains(double x, double y) const {
  const double r2 = x * x + y * y;
  switch (shape) {
    case RegionShape::interval: return x >= inner && x <= outer;
    case RegionShape::disk: return r2 <= outer * outer;
    case RegionShape::annulus: return r2 > inner * inner && r2 <= outer * outer;
    case RegionShape::complement: return true;
  }
  return false;
}

std::vector<Interval> PhaseSpaceDomain::axes() const {
  std::vector<Interval> out = spatial;
  out.insert(out.end(), angular.begin(), angular.end());
  return out;
}

int PhaseSpaceDomain::region_of(std::span<const double> point) const {
  const double x = point[0];
  const double y = spatial_dim() > 1 ? point[1] : 0.0;
  for (const auto& r : regions)
    if (r.contains(x, y)) return r.id;
  throw std::domain_error("point (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") is outside every region");
}

double PhaseSpaceDomain::measure() const {
  double v = 1.0;
  for (const auto& a : axes()) v *= a.length();
  return v;
}

double PhaseSpaceDomain::inflow_measure(Face face) const {
  const int axis = face_axis(face);
  if (axis >= spatial_dim()) throw std::invalid_argument("face not present in this geometry");
  double v = 1.0;
  for (Index a = 0; a < spatial_dim(); ++a)
    if (a != axis) v *= spatial[static_cast<std::size_t>(a)].length();
  for (const auto& a : angular) v *= a.length();
  // The inflow sector is half of the restricted angular coordinate.
  return 0.5 * v;
}

double PhaseSpaceDomain::interface_measure(const InterfaceDescriptor& iface) const {
  double v = 1.0;
  for (Index a = 0; a < spatial_dim(); ++a)
    if (a != iface.axis) v *= spatial[static_cast<std::size_t>(a)].length();
  for (const auto& a : angular) v *= a.length();
  return v;
}

Eigen::Vector3d PhaseSpaceDomain::face_normal(Face face) const {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n(face_axis(face)) = face_is_low(face) ? -1.0 : 1.0;
  return n;
}

const InterfaceDescriptor& PhaseSpaceDomain::interface(int id) const {
  for (const auto& i : interfaces)
    if (i.id == id) return i;
  throw std::invalid_argument("unknown interface id " + std::to_string(id));
}

void PhaseSpaceDomain::validate() const {
  const Index expect_spatial = kind == GeometryKind::pincell2d ? 2 : 1;
  const Index expect_angular = kind == GeometryKind::slab1d ? 1 : 2;
  if (spatial_dim() != expect_spatial || angular_dim() != expect_angular)
    throw std::invalid_argument("domain axes do not match geometry " + std::string(to_string(kind)));
  for (const auto& a : axes())
    if (!(a.lo < a.hi)) throw std::invalid_argument("domain has an empty interval");
  if (regions.empty()) throw std::invalid_argument("domain has no regions");
  if (regions.back().shape != RegionShape::complement && regions.size() > 1) {
    // Non-complement tails are allowed only when the intervals cover the box.
    if (kind == GeometryKind::pincell2d)
      throw std::invalid_argument("pin-cell region list must end with a complement region");
  }
  for (const auto& f : faces)
    if (face_axis(f) >= spatial_dim()) throw std::invalid_argument("face not present in this geometry");
}

Eigen::Vector3d direction(double phi, double mu) {
  const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  return {s * std::cos(phi), s * std::sin(phi), mu};
}

double trace_weight(const Eigen::Vector3d& normal, double phi, double mu) {
  if (std::abs(normal.norm() - 1.0) > 1e-10) throw std::invalid_argument("trace_weight: normal is not a unit vector");
  if (mu < -1.0 || mu > 1.0) throw std::invalid_argument("trace_weight: mu outside [-1, 1]");
  return std::abs(normal.dot(direction(phi, mu)));
}

std::pair<double, double> reflect_direction(const Eigen::Vector3d& normal, double phi, double mu) {
  const double tol = 1e-12;
  const bool x_face = std::abs(std::abs(normal.x()) - 1.0) < tol && std::abs(normal.y()) < tol &&
                      std::abs(normal.z()) < tol;
  const bool y_face = std::abs(std::abs(normal.y()) - 1.0) < tol && std::abs(normal.x()) < tol &&
                      std::abs(normal.z()) < tol;
  if (x_face) {
    double r = kPi - phi;
    if (r < 0.0) r += 2.0 * kPi;
    return {r, mu};
  }
  if (y_face) return {2.0 * kPi - phi, mu};
  throw std::invalid_argument("reflect_direction: only x- or y-aligned normals are supported");
}

void BoundaryBlock::append(const BoundaryBlock& other) {
  const Index n0 = size();
  const Index cols = size() == 0 ? other.points.cols() : points.cols();
  Matrix p(n0 + other.size(), cols);
  Matrix nr(n0 + other.size(), 3);
  Vector w(n0 + other.size());
  if (n0 > 0) {
    p.topRows(n0) = points;
    nr.topRows(n0) = normals;
    w.head(n0) = trace_weights;
  }
  p.bottomRows(other.size()) = other.points;
  nr.bottomRows(other.size()) = other.normals;
  w.tail(other.size()) = other.trace_weights;
  points = std::move(p);
  normals = std::move(nr);
  trace_weights = std::move(w);
  faces.insert(faces.end(), other.faces.begin(), other.faces.end());
  tags.insert(tags.end(), other.tags.begin(), other.tags.end());
}

void InterfaceBlock::append(const InterfaceBlock& other) {
  const Index n0 = size();
  const Index cols = size() == 0 ? other.points.cols() : points.cols();
  Matrix p(n0 + other.size(), cols);
  Matrix nr(n0 + other.size(), 3);
  Vector w(n0 + other.size());
  if (n0 > 0) {
    p.topRows(n0) = points;
    nr.topRows(n0) = normals;
    w.head(n0) = trace_weights;
  }
  p.bottomRows(other.size()) = other.points;
  nr.bottomRows(other.size()) = other.normals;
  w.tail(other.size()) = other.trace_weights;
  points = std::move(p);
  normals = std::move(nr);
  trace_weights = std::move(w);
  region_pairs.insert(region_pairs.end(), other.region_pairs.begin(), other.region_pairs.end());
}

Matrix tensor_grid(const PhaseSpaceDomain& domain, std::span<const Index> counts) {
  const auto axes = domain.axes();
  if (static_cast<Index>(counts.size()) != domain.dim())
    throw std::invalid_argument("tensor_grid: expected " + std::to_string(domain.dim()) +
                                " counts, got " + std::to_string(counts.size()));
  std::vector<std::vector<double>> nodes;
  Index keep = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (counts[a] < 2) throw std::invalid_argument("tensor_grid: each axis count must be >= 2");
    nodes.push_back(linspace(axes[a].lo, axes[a].hi, counts[a]));
    keep *= static_cast<Index>(a) < domain.spatial_dim() ? counts[a] - 2 : counts[a];
  }
  Matrix out(keep, domain.dim());
  Index row = 0;
  const std::vector<Index> cnt(counts.begin(), counts.end());
  for_each_index(cnt, [&](const std::vector<Index>& idx) {
    for (Index a = 0; a < domain.spatial_dim(); ++a)
      if (idx[static_cast<std::size_t>(a)] == 0 || idx[static_cast<std::size_t>(a)] == cnt[static_cast<std::size_t>(a)] - 1) return;
    for (std::size_t a = 0; a < idx.size(); ++a) out(row, static_cast<Index>(a)) = nodes[a][static_cast<std::size_t>(idx[a])];
    ++row;
  });
  return out;
}

BoundaryBlock boundary_grid(const PhaseSpaceDomain& domain, Face face, std::span<const Index> counts) {
  const int axis = face_axis(face);
  if (axis >= domain.spatial_dim())
    throw std::invalid_argument("boundary_grid: unknown face '" + std::string(to_string(face)) +
                                "' for geometry " + std::string(to_string(domain.kind)));
  const Index free_axes = domain.dim() - 1;
  if (static_cast<Index>(counts.size()) != free_axes)
    throw std::invalid_argument("boundary_grid: expected " + std::to_string(free_axes) + " counts");
  for (Index c : counts)
    if (c < 2) throw std::invalid_argument("boundary_grid: each axis count must be >= 2");

  const auto axes = domain.axes();
  const Index sector_axis = domain.spatial_dim();  // first angular coordinate (mu or phi)
  const Interval sector = inflow_sector(domain.kind, face);
  const Interval& face_interval = axes[static_cast<std::size_t>(axis)];
  const double face_pos = face_is_low(face) ? face_interval.lo : face_interval.hi;

  // Free axes in phase-space order, skipping the face's own axis.
  std::vector<Index> free;
  for (Index a = 0; a < domain.dim(); ++a)
    if (a != axis) free.push_back(a);
  std::vector<std::vector<double>> nodes;
  for (std::size_t f = 0; f < free.size(); ++f) {
    const Index a = free[f];
    const Interval iv = a == sector_axis ? sector : axes[static_cast<std::size_t>(a)];
    nodes.push_back(linspace(iv.lo, iv.hi, counts[f]));
  }

  Index total = 1;
  for (Index c : counts) total *= c;
  BoundaryBlock block;
  block.points.resize(total, domain.dim());
  block.normals.resize(total, 3);
  block.trace_weights.resize(total);
  block.faces.assign(static_cast<std::size_t>(total), face);
  block.tags.assign(static_cast<std::size_t>(total), BoundaryKind::untagged);
  const Eigen::Vector3d normal = domain.face_normal(face);

  Index row = 0;
  const std::vector<Index> cnt(counts.begin(), counts.end());
  std::vector<double> p(static_cast<std::size_t>(domain.dim()));
  for_each_index(cnt, [&](const std::vector<Index>& idx) {
    p[static_cast<std::size_t>(axis)] = face_pos;
    for (std::size_t f = 0; f < free.size(); ++f) {
      double v = nodes[f][static_cast<std::size_t>(idx[f])];
      if (free[f] == sector_axis && domain.kind != GeometryKind::slab1d && v < 0.0) v += 2.0 * kPi;
      p[static_cast<std::size_t>(free[f])] = v;
    }
    for (Index a = 0; a < domain.dim(); ++a) block.points(row, a) = p[static_cast<std::size_t>(a)];
    block.normals.row(row) = normal.transpose();
    block.trace_weights(row) = point_trace_weight(domain.kind, normal, p, domain.spatial_dim());
    ++row;
  });
  return block;
}

InterfaceBlock interface_grid(const PhaseSpaceDomain& domain, int interface_id,
                              std::span<const Index> counts) {
  const InterfaceDescriptor& iface = domain.interface(interface_id);
  const Index free_axes = domain.dim() - 1;
  if (static_cast<Index>(counts.size()) != free_axes)
    throw std::invalid_argument("interface_grid: expected " + std::to_string(free_axes) + " counts");
  for (Index c : counts)
    if (c < 1) throw std::invalid_argument("interface_grid: counts must be positive");

  const auto axes = domain.axes();
  std::vector<Index> free;
  for (Index a = 0; a < domain.dim(); ++a)
    if (a != iface.axis) free.push_back(a);
  std::vector<std::vector<double>> nodes;
  for (std::size_t f = 0; f < free.size(); ++f) {
    const Interval& iv = axes[static_cast<std::size_t>(free[f])];
    nodes.push_back(linspace(iv.lo, iv.hi, counts[f]));
  }

  Index total = 1;
  for (Index c : counts) total *= c;
  InterfaceBlock block;
  block.points.resize(total, domain.dim());
  block.normals.resize(total, 3);
  block.trace_weights.resize(total);
  block.region_pairs.assign(static_cast<std::size_t>(total), {iface.region_from, iface.region_to});
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  normal(iface.axis) = 1.0;

  Index row = 0;
  const std::vector<Index> cnt(counts.begin(), counts.end());
  std::vector<double> p(static_cast<std::size_t>(domain.dim()));
  for_each_index(cnt, [&](const std::vector<Index>& idx) {
    p[static_cast<std::size_t>(iface.axis)] = iface.position;
    for (std::size_t f = 0; f < free.size(); ++f)
      p[static_cast<std::size_t>(free[f])] = nodes[f][static_cast<std::size_t>(idx[f])];
    for (Index a = 0; a < domain.dim(); ++a) block.points(row, a) = p[static_cast<std::size_t>(a)];
    block.normals.row(row) = normal.transpose();
    block.trace_weights(row) = point_trace_weight(domain.kind, normal, p, domain.spatial_dim());
    ++row;
  });
  return block;
}

CollocationSet build_collocation(const PhaseSpaceDomain& domain, const CollocationCounts& counts) {
  domain.validate();
  CollocationSet set;
  set.interior = tensor_grid(domain, counts.interior);
  if (set.interior.rows() == 0) throw std::invalid_argument("build_collocation: empty interior set");
  set.eta_interior = std::sqrt(domain.measure() / static_cast<double>(set.interior.rows()));

  std::vector<QuadratureRule> factors;
  for (Index a = 0; a < domain.angular_dim(); ++a) {
    const Interval& iv = domain.angular[static_cast<std::size_t>(a)];
    factors.push_back(trapezoid_rule(iv.lo, iv.hi, counts.interior[static_cast<std::size_t>(domain.spatial_dim() + a)]));
  }
  set.angular_rule = tensor_rule(factors);

  double boundary_measure = 0.0;
  for (Face f : domain.faces) {
    set.boundary.append(boundary_grid(domain, f, counts.boundary));
    boundary_measure += domain.inflow_measure(f);
  }
  if (set.boundary.size() > 0)
    set.eta_boundary = std::sqrt(boundary_measure / static_cast<double>(set.boundary.size()));

  double interface_measure = 0.0;
  for (const auto& iface : domain.interfaces) {
    set.interface.append(interface_grid(domain, iface.id, counts.interface));
    interface_measure += domain.interface_measure(iface);
  }
  if (set.interface.size() > 0)
    set.eta_interface = std::sqrt(interface_measure / static_cast<double>(set.interface.size()));
  return set;
}

}  // namespace rann
