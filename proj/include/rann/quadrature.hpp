#pragma once

#include "rann/basis.hpp"

#include <span>
#include <vector>

namespace rann {

/// Nodes (K x dim, one node per row) and positive weights. Tensor-product
/// rules order nodes lexicographically with the last axis varying fastest.
struct QuadratureRule {
  Matrix nodes;
  Vector weights;

  Index size() const { return weights.size(); }
  Index dim() const { return nodes.cols(); }
  double total_weight() const { return weights.sum(); }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (Index k = 0; k < size(); ++k) acc += weights(k) * f(nodes.row(k));
    return acc;
  }
};

/// Composite trapezoid on [a, b] with K equispaced nodes including both ends.
QuadratureRule trapezoid_rule(double a, double b, Index K);

/// K-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre_rule(double a, double b, Index K);

/// Equal-weight rule on the shifted nodes a + (k + 1/2) h, h = (b - a) / K.
/// For periodic integrands this is the composite trapezoid rule on a
/// staggered grid; the sweep solver uses it so reflected ordinates stay
/// inside the ordinate set.
QuadratureRule periodic_midpoint_rule(double a, double b, Index K);

/// Cartesian product of the factor rules.
QuadratureRule tensor_rule(std::span<const QuadratureRule> rules);

}  // namespace rann
