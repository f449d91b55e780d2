#pragma once

#include "rann/basis.hpp"
#include "rann/quadrature.hpp"

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rann {

/// Phase-space layouts. Point coordinates are ordered spatial first, then
/// angular:
///   slab1d     (x, mu)            mu is the direction cosine along x
///   cylinder1d (x, phi, mu)       x is the radial coordinate
///   pincell2d  (x, y, phi, mu)
enum class GeometryKind { slab1d, cylinder1d, pincell2d };

enum class Face { x_lo, x_hi, y_lo, y_hi };

enum class BoundaryKind { untagged, vacuum, reflecting };

std::string_view to_string(GeometryKind kind);
std::string_view to_string(Face face);
std::string_view to_string(BoundaryKind kind);
Face face_from_string(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

enum class RegionShape { interval, disk, annulus, complement };

/// Material region. Membership is resolved by scanning the region list in
/// order and taking the first match, so a point on a closed curve belongs to
/// the region listed first. Builtin problems list inner shapes first:
///   interval  inner <= x <= outer
///   disk      x^2 + y^2 <= outer^2
///   annulus   inner^2 < x^2 + y^2 <= outer^2
///   complement  always matches
struct RegionDescriptor {
  int id = 1;
  RegionShape shape = RegionShape::complement;
  double inner = 0.0;
  double outer = 0.0;

  bool contains(double x, double y) const;
};

/// Planar network interface {x_axis = position}; the unit normal is +e_axis
/// and points from region_from into region_to.
struct InterfaceDescriptor {
  int id = 0;
  int axis = 0;
  double position = 0.0;
  int region_from = 1;
  int region_to = 2;
};

struct PhaseSpaceDomain {
  GeometryKind kind = GeometryKind::slab1d;
  std::vector<Interval> spatial;
  std::vector<Interval> angular;
  std::vector<RegionDescriptor> regions;
  std::vector<InterfaceDescriptor> interfaces;
  /// Faces carrying a boundary condition (the cylinder axis x = 0 has none).
  std::vector<Face> faces;

  Index spatial_dim() const { return static_cast<Index>(spatial.size()); }
  Index angular_dim() const { return static_cast<Index>(angular.size()); }
  Index dim() const { return spatial_dim() + angular_dim(); }
  std::vector<Interval> axes() const;

  /// Region id (1-based) of the spatial part of a phase-space point.
  int region_of(std::span<const double> point) const;
  int region_count() const { return static_cast<int>(regions.size()); }

  /// |D|: product of all axis lengths.
  double measure() const;
  /// Measure of the inflow part of one face in the parameter box.
  double inflow_measure(Face face) const;
  double interface_measure(const InterfaceDescriptor& iface) const;
  Eigen::Vector3d face_normal(Face face) const;
  const InterfaceDescriptor& interface(int id) const;

  void validate() const;
};

/// Omega = (sqrt(1 - mu^2) cos phi, sqrt(1 - mu^2) sin phi, mu).
Eigen::Vector3d direction(double phi, double mu);

/// |n . Omega| for a unit normal; throws if |n| differs from 1 by > 1e-10.
double trace_weight(const Eigen::Vector3d& normal, double phi, double mu);

/// Slab form of the trace weight, |mu|.
inline double slab_trace_weight(double mu) { return mu < 0.0 ? -mu : mu; }

/// Specular reflection for an axis-aligned face: x-faces map phi -> pi - phi,
/// y-faces map phi -> 2 pi - phi (results in [0, 2 pi]); mu is unchanged.
std::pair<double, double> reflect_direction(const Eigen::Vector3d& normal, double phi, double mu);

struct BoundaryBlock {
  Matrix points;                   // N_B x d
  std::vector<Face> faces;         // per point
  Matrix normals;                  // N_B x 3, outward
  Vector trace_weights;            // |n . Omega| (|mu| in slab geometry)
  std::vector<BoundaryKind> tags;  // untagged until a problem is attached

  Index size() const { return points.rows(); }
  void append(const BoundaryBlock& other);
};

struct InterfaceBlock {
  Matrix points;
  Matrix normals;
  Vector trace_weights;
  std::vector<std::pair<int, int>> region_pairs;  // (from, to) per point

  Index size() const { return points.rows(); }
  void append(const InterfaceBlock& other);
};

struct AnchorBlock {
  Matrix points;
  Vector values;

  Index size() const { return points.rows(); }
};

struct CollocationCounts {
  std::vector<Index> interior;   // one count per phase-space axis
  std::vector<Index> boundary;   // one count per free axis of a face
  std::vector<Index> interface;  // one count per free axis of an interface
};

struct CollocationSet {
  Matrix interior;
  BoundaryBlock boundary;
  InterfaceBlock interface;
  AnchorBlock anchors;
  /// Trapezoid rule over the angular axes of the interior grid; its nodes are
  /// the angular coordinates of the grid slice through each spatial point.
  QuadratureRule angular_rule;
  double eta_interior = 0.0;
  double eta_boundary = 0.0;
  double eta_interface = 0.0;
};

/// Equispaced grid with endpoints on every axis (last axis fastest), minus
/// the points lying on a spatial face.
Matrix tensor_grid(const PhaseSpaceDomain& domain, std::span<const Index> counts);

/// Grid over the free axes of `face`, restricted to its inflow sector.
BoundaryBlock boundary_grid(const PhaseSpaceDomain& domain, Face face, std::span<const Index> counts);

/// Grid over the free axes of an interface; a count of 1 places the single
/// node at the middle of that axis.
InterfaceBlock interface_grid(const PhaseSpaceDomain& domain, int interface_id,
                              std::span<const Index> counts);

/// Interior grid, boundary blocks for every face, interface blocks and the
/// eta scale factors sqrt(|D|/N_I), sqrt(|Gamma-|/N_B), sqrt(|Gamma_I|/N_F).
CollocationSet build_collocation(const PhaseSpaceDomain& domain, const CollocationCounts& counts);

}  // namespace rann
