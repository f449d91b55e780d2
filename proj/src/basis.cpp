#include "rann/basis.hpp"

#include "rann/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rann {

double GaussianActivation::value(double z) const { return std::exp(-0.5 * z * z); }

double GaussianActivation::derivative(double z) const { return -z * std::exp(-0.5 * z * z); }

std::shared_ptr<const Activation> gaussian_activation() {
  static const auto instance = std::make_shared<const GaussianActivation>();
  return instance;
}

RandomFeatureBasis::RandomFeatureBasis(Matrix weights, Vector biases, double bound_r,
                                       std::uint64_t seed,
                                       std::shared_ptr<const Activation> activation)
    : weights_(std::move(weights)),
      biases_(std::move(biases)),
      bound_r_(bound_r),
      seed_(seed),
      activation_(std::move(activation)) {
  if (weights_.rows() < 1 || weights_.cols() < 1)
    throw std::invalid_argument("RandomFeatureBasis: need m >= 1 and d >= 1");
  if (biases_.size() != weights_.rows())
    throw std::invalid_argument("RandomFeatureBasis: bias count " + std::to_string(biases_.size()) +
                                " does not match neuron count " + std::to_string(weights_.rows()));
  if (!(bound_r_ > 0.0)) throw std::invalid_argument("RandomFeatureBasis: bound_r must be positive");
  if (!activation_) throw std::invalid_argument("RandomFeatureBasis: null activation");
}

Matrix RandomFeatureBasis::preactivation(const Matrix& points) const {
  if (points.cols() != dimension())
    throw std::invalid_argument("basis evaluation: points have dimension " +
                                std::to_string(points.cols()) + ", basis expects " +
                                std::to_string(dimension()));
  Matrix z = points * weights_.transpose();
  z.rowwise() += biases_.transpose();
  return z;
}

RandomFeatureBasis build_basis(Index m, Index d, double bound_r, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("build_basis: m must be >= 1");
  if (d < 1) throw std::invalid_argument("build_basis: d must be >= 1");
  if (!(bound_r > 0.0)) throw std::invalid_argument("build_basis: bound_r must be positive");

  RandomStream stream(seed);
  Matrix weights(m, d);
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < d; ++k) weights(j, k) = stream.uniform(-bound_r, bound_r);
  Vector biases(m);
  for (Index j = 0; j < m; ++j) biases(j) = stream.uniform(-bound_r, bound_r);
  return RandomFeatureBasis(std::move(weights), std::move(biases), bound_r, seed);
}

namespace {

bool is_gaussian(const Activation& act) {
  return dynamic_cast<const GaussianActivation*>(&act) != nullptr;
}

}  // namespace

Matrix eval_basis(const RandomFeatureBasis& basis, const Matrix& points) {
  Matrix z = basis.preactivation(points);
  const Activation& act = basis.activation();
  if (is_gaussian(act)) return (-0.5 * z.array().square()).exp().matrix();
  return z.unaryExpr([&act](double v) { return act.value(v); });
}

Matrix eval_basis_derivative(const RandomFeatureBasis& basis, const Matrix& points, Index axis) {
  if (axis < 0 || axis >= basis.dimension())
    throw std::invalid_argument("eval_basis_derivative: axis " + std::to_string(axis) +
                                " out of range for dimension " +
                                std::to_string(basis.dimension()));
  Matrix z = basis.preactivation(points);
  const Activation& act = basis.activation();
  Matrix out = z.unaryExpr([&act](double v) { return act.derivative(v); });
  out.array().rowwise() *= basis.weights().col(axis).transpose().array();
  return out;
}

BasisJet eval_basis_jet(const RandomFeatureBasis& basis, const Matrix& points) {
  Matrix z = basis.preactivation(points);
  const Activation& act = basis.activation();
  BasisJet jet;
  if (is_gaussian(act)) {
    // Vectorized path: one exp per entry.
    jet.value = (-0.5 * z.array().square()).exp().matrix();
    jet.slope = (-z.array() * jet.value.array()).matrix();
    return jet;
  }
  jet.value = z.unaryExpr([&act](double v) { return act.value(v); });
  jet.slope = z.unaryExpr([&act](double v) { return act.derivative(v); });
  return jet;
}

}  // namespace rann
