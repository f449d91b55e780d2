#include "rann/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace rann {

QuadratureRule trapezoid_rule(double a, double b, Index K) {
  if (K < 2) throw std::invalid_argument("trapezoid_rule: need K >= 2");
  if (!(a < b)) throw std::invalid_argument("trapezoid_rule: need a < b");
  const double h = (b - a) / static_cast<double>(K - 1);
  QuadratureRule rule{Matrix(K, 1), Vector::Constant(K, h)};
  for (Index k = 0; k < K; ++k) rule.nodes(k, 0) = a + h * static_cast<double>(k);
  rule.nodes(K - 1, 0) = b;
  rule.weights(0) = 0.5 * h;
  rule.weights(K - 1) = 0.5 * h;
  return rule;
}

namespace {

// Returns (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre(Index n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (Index k = 2; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
    p0 = p1;
    p1 = p2;
  }
  const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadratureRule gauss_legendre_rule(double a, double b, Index K) {
  if (K < 1) throw std::invalid_argument("gauss_legendre_rule: need K >= 1");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre_rule: need a < b");

  QuadratureRule rule{Matrix(K, 1), Vector(K)};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double nd = static_cast<double>(K);
  // Roots come in +/- pairs; Newton from the asymptotic guess.
  for (Index i = 0; i < (K + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(K, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-14) break;
    }
    const double dp = legendre(K, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i, 0) = mid - half * x;
    rule.nodes(K - 1 - i, 0) = mid + half * x;
    rule.weights(i) = half * w;
    rule.weights(K - 1 - i) = half * w;
  }
  if (K % 2 == 1) rule.nodes((K - 1) / 2, 0) = mid;
  return rule;
}

QuadratureRule periodic_midpoint_rule(double a, double b, Index K) {
  if (K < 2) throw std::invalid_argument("periodic_midpoint_rule: need K >= 2");
  if (!(a < b)) throw std::invalid_argument("periodic_midpoint_rule: need a < b");
  const double h = (b - a) / static_cast<double>(K);
  QuadratureRule rule{Matrix(K, 1), Vector::Constant(K, h)};
  for (Index k = 0; k < K; ++k) rule.nodes(k, 0) = a + h * (static_cast<double>(k) + 0.5);
  return rule;
}

QuadratureRule tensor_rule(std::span<const QuadratureRule> rules) {
  if (rules.empty()) throw std::invalid_argument("tensor_rule: empty factor list");
  Index total = 1;
  Index dim = 0;
  for (const auto& r : rules) {
    total *= r.size();
    dim += r.dim();
  }
  QuadratureRule out{Matrix(total, dim), Vector(total)};
  for (Index n = 0; n < total; ++n) {
    Index rem = n;
    double w = 1.0;
    Index col = dim;
    for (auto it = rules.rbegin(); it != rules.rend(); ++it) {
      const Index k = rem % it->size();
      rem /= it->size();
      col -= it->dim();
      out.nodes.block(n, col, 1, it->dim()) = it->nodes.row(k);
      w *= it->weights(k);
    }
    out.weights(n) = w;
  }
  return out;
}

}  // namespace rann
