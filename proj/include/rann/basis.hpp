#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string_view>

namespace rann {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Scalar activation rho applied to the pre-activation z = w.x + b.
class Activation {
 public:
  virtual ~Activation() = default;
  virtual double value(double z) const = 0;
  virtual double derivative(double z) const = 0;
  virtual std::string_view name() const = 0;
};

/// rho(z) = exp(-z^2 / 2), rho'(z) = -z exp(-z^2 / 2).
class GaussianActivation final : public Activation {
 public:
  double value(double z) const override;
  double derivative(double z) const override;
  std::string_view name() const override { return "gaussian"; }
};

std::shared_ptr<const Activation> gaussian_activation();

/// Fixed random hidden layer: m neurons psi_j(x) = rho(w_j . x + b_j) on R^d.
///
/// Immutable after construction; every evaluation is a pure function of the
/// stored weights, so a basis may be shared freely between threads.
class RandomFeatureBasis {
 public:
  /// Wraps explicit parameters. `weights` is m x d, `biases` has length m.
  /// bound_r and seed are recorded for reporting only.
  RandomFeatureBasis(Matrix weights, Vector biases, double bound_r = 1.0,
                     std::uint64_t seed = 0,
                     std::shared_ptr<const Activation> activation = gaussian_activation());

  Index size() const { return weights_.rows(); }
  Index dimension() const { return weights_.cols(); }
  const Matrix& weights() const { return weights_; }
  const Vector& biases() const { return biases_; }
  double bound_r() const { return bound_r_; }
  std::uint64_t seed() const { return seed_; }
  const Activation& activation() const { return *activation_; }

  /// N x m matrix of pre-activations z_ij = w_j . x_i + b_j.
  Matrix preactivation(const Matrix& points) const;

 private:
  Matrix weights_;
  Vector biases_;
  double bound_r_;
  std::uint64_t seed_;
  std::shared_ptr<const Activation> activation_;
};

/// Draws weights (neuron-major, then coordinate) and then biases from one
/// RandomStream(seed), all uniform on [-bound_r, bound_r).
RandomFeatureBasis build_basis(Index m, Index d, double bound_r, std::uint64_t seed);

/// N x m matrix of psi_j(x_i).
Matrix eval_basis(const RandomFeatureBasis& basis, const Matrix& points);

/// N x m matrix of d psi_j / d x_axis at x_i.
Matrix eval_basis_derivative(const RandomFeatureBasis& basis, const Matrix& points, Index axis);

/// Values and activation slopes from one pass over the pre-activations.
/// The derivative along axis a is slope.array().rowwise() * weights.col(a)^T.
struct BasisJet {
  Matrix value;
  Matrix slope;
};

BasisJet eval_basis_jet(const RandomFeatureBasis& basis, const Matrix& points);

}  // namespace rann
