#include "rann/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rann {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void not_converged(const char* who, const SnResult& r) {
  throw std::runtime_error(std::string(who) + ": no convergence after " + std::to_string(r.iterations) +
                           " iterations (max |delta Phi| = " + std::to_string(r.change) + ")");
}

BoundaryKind bc_of(const TransportProblem& p, Face f) {
  auto it = p.bc.find(f);
  return it == p.bc.end() ? BoundaryKind::vacuum : it->second;
}

}  // namespace

void SnConfig::validate() const {
  if (cells < 2 || nx < 2 || ny < 2 || K < 2 || n_phi < 2 || n_mu < 2)
    throw std::invalid_argument("S_N config: all counts must be >= 2");
  if (!(tolerance > 0.0)) throw std::invalid_argument("S_N config: tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("S_N config: max_iterations must be positive");
}

SnResult solve_slab_sn(const TransportProblem& problem, const SnConfig& config) {
  config.validate();
  if (problem.kind() != GeometryKind::slab1d) throw std::invalid_argument("solve_slab_sn: slab problem required");
  if (problem.groups() != 1) throw std::invalid_argument("solve_slab_sn: one-group problems only");
  const Index M = config.cells;
  const double lo = problem.domain.spatial[0].lo, hi = problem.domain.spatial[0].hi;
  const double h = (hi - lo) / static_cast<double>(M);
  const QuadratureRule q = trapezoid_rule(-1.0, 1.0, config.K);
  const Index K = q.size();
  const double norm = problem.kernel_norm();

  Vector x(M + 1), sigma_t(M + 1), kernel(M + 1);
  for (Index i = 0; i <= M; ++i) {
    x(i) = i == M ? hi : lo + h * static_cast<double>(i);
    const double p[1] = {x(i)};
    const int region = problem.domain.region_of(p);
    sigma_t(i) = problem.xs.total(region, 0);
    kernel(i) = norm * problem.xs.transfer(region, 0, 0);
  }
  Matrix source(M + 1, K);  // Q at (x_i, mu_k)
  for (Index i = 0; i <= M; ++i)
    for (Index k = 0; k < K; ++k) {
      const double p[2] = {x(i), q.nodes(k, 0)};
      source(i, k) = problem.source_at(p, 0);
    }

  SnResult res;
  res.normalized = (source.array() == 0.0).all() && (kernel.array() != 0.0).any();
  // Value at x = 0 by linear interpolation, used for normalization.
  auto centre_value = [&](const Vector& phi) {
    const double s = (0.0 - lo) / h;
    const auto i = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, M - 1);
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * phi(i) + t * phi(i + 1);
  };

  Vector phi = res.normalized ? Vector::Ones(M + 1) : Vector::Zero(M + 1);
  Matrix psi = Matrix::Zero(M + 1, K);
  const bool refl_lo = bc_of(problem, Face::x_lo) == BoundaryKind::reflecting;
  const bool refl_hi = bc_of(problem, Face::x_hi) == BoundaryKind::reflecting;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const Matrix prev_psi = psi;
    for (Index k = 0; k < K; ++k) {
      const double mu = q.nodes(k, 0);
      const Index mirror = K - 1 - k;  // nodes are symmetric about 0
      const double a = std::abs(mu) / h;
      if (mu > 0.0) {
        psi(0, k) = refl_lo ? prev_psi(0, mirror) : 0.0;
        for (Index i = 1; i <= M; ++i)
          psi(i, k) = (kernel(i) * phi(i) + source(i, k) + a * psi(i - 1, k)) / (sigma_t(i) + a);
      } else if (mu < 0.0) {
        psi(M, k) = refl_hi ? prev_psi(M, mirror) : 0.0;
        for (Index i = M - 1; i >= 0; --i)
          psi(i, k) = (kernel(i) * phi(i) + source(i, k) + a * psi(i + 1, k)) / (sigma_t(i) + a);
      } else {
        for (Index i = 0; i <= M; ++i) psi(i, k) = (kernel(i) * phi(i) + source(i, k)) / sigma_t(i);
      }
    }
    Vector next = psi * q.weights;
    if (res.normalized) {
      const double c = centre_value(next);
      if (c == 0.0) {
        next.setZero();
        psi.setZero();
      } else {
        next /= c;
        psi /= c;
      }
    }
    res.change = (next - phi).cwiseAbs().maxCoeff();
    res.history.push_back(res.change);
    phi = next;
    res.iterations = it;
    if (res.change < config.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.field.problem = problem.name;
  res.field.angular_rule = "S_N trapezoid K=" + std::to_string(K);
  res.field.grid = x;
  res.field.values = phi;
  if (!res.converged) not_converged("solve_slab_sn", res);
  return res;
}

SnResult solve_pincell_sn(const TransportProblem& problem, const SnConfig& config) {
  config.validate();
  if (problem.kind() != GeometryKind::pincell2d) throw std::invalid_argument("solve_pincell_sn: pin-cell problem required");
  if (problem.groups() != 1) throw std::invalid_argument("solve_pincell_sn: one-group problems only");
  if (config.n_phi % 4 != 0) throw std::invalid_argument("solve_pincell_sn: n_phi must be a multiple of 4");
  const Index nx = config.nx, ny = config.ny;
  const auto& ix = problem.domain.spatial[0];
  const auto& iy = problem.domain.spatial[1];
  const double hx = (ix.hi - ix.lo) / static_cast<double>(nx);
  const double hy = (iy.hi - iy.lo) / static_cast<double>(ny);
  const QuadratureRule rphi = periodic_midpoint_rule(0.0, 2.0 * kPi, config.n_phi);
  const QuadratureRule rmu = gauss_legendre_rule(-1.0, 1.0, config.n_mu);
  const Index NP = rphi.size(), NM = rmu.size();
  const Index NO = NP * NM;  // ordinate o = a * NM + l
  const double norm = problem.kernel_norm();

  const Index NC = nx * ny;  // cell c = i * ny + j
  Matrix centres(NC, 2);
  Vector sigma_t(NC), kernel(NC);
  for (Index i = 0; i < nx; ++i)
    for (Index j = 0; j < ny; ++j) {
      const Index c = i * ny + j;
      centres(c, 0) = ix.lo + (static_cast<double>(i) + 0.5) * hx;
      centres(c, 1) = iy.lo + (static_cast<double>(j) + 0.5) * hy;
      const double p[2] = {centres(c, 0), centres(c, 1)};
      const int region = problem.domain.region_of(p);
      sigma_t(c) = problem.xs.total(region, 0);
      kernel(c) = norm * problem.xs.transfer(region, 0, 0);
    }
  Matrix source(NC, NO);
  for (Index c = 0; c < NC; ++c)
    for (Index a = 0; a < NP; ++a)
      for (Index l = 0; l < NM; ++l) {
        const double p[4] = {centres(c, 0), centres(c, 1), rphi.nodes(a, 0), rmu.nodes(l, 0)};
        source(c, a * NM + l) = problem.source_at(p, 0);
      }

  const bool refl[4] = {bc_of(problem, Face::x_lo) == BoundaryKind::reflecting,
                        bc_of(problem, Face::x_hi) == BoundaryKind::reflecting,
                        bc_of(problem, Face::y_lo) == BoundaryKind::reflecting,
                        bc_of(problem, Face::y_hi) == BoundaryKind::reflecting};
  // Mirrored azimuth indices: x-faces phi -> pi - phi, y-faces phi -> 2 pi - phi.
  auto mirror_x = [NP](Index a) { return ((NP / 2 - 1 - a) % NP + NP) % NP; };
  auto mirror_y = [NP](Index a) { return NP - 1 - a; };

  SnResult res;
  Vector phi = Vector::Zero(NC);
  Matrix psi = Matrix::Zero(NC, NO);
  for (int it = 1; it <= config.max_iterations; ++it) {
    const Matrix prev = psi;
    for (Index a = 0; a < NP; ++a) {
      const double cphi = std::cos(rphi.nodes(a, 0)), sphi = std::sin(rphi.nodes(a, 0));
      for (Index l = 0; l < NM; ++l) {
        const Index o = a * NM + l;
        const double s = std::sqrt(1.0 - rmu.nodes(l, 0) * rmu.nodes(l, 0));
        const double cx = s * cphi, cy = s * sphi;
        const double ax = std::abs(cx) / hx, ay = std::abs(cy) / hy;
        const Index ox = mirror_x(a) * NM + l, oy = mirror_y(a) * NM + l;
        for (Index ii = 0; ii < nx; ++ii) {
          const Index i = cx > 0.0 ? ii : nx - 1 - ii;
          for (Index jj = 0; jj < ny; ++jj) {
            const Index j = cy > 0.0 ? jj : ny - 1 - jj;
            const Index c = i * ny + j;
            double in_x, in_y;
            if (cx > 0.0)
              in_x = i > 0 ? psi(c - ny, o) : (refl[0] ? prev(c, ox) : 0.0);
            else
              in_x = i < nx - 1 ? psi(c + ny, o) : (refl[1] ? prev(c, ox) : 0.0);
            if (cy > 0.0)
              in_y = j > 0 ? psi(c - 1, o) : (refl[2] ? prev(c, oy) : 0.0);
            else
              in_y = j < ny - 1 ? psi(c + 1, o) : (refl[3] ? prev(c, oy) : 0.0);
            psi(c, o) = (kernel(c) * phi(c) + source(c, o) + ax * in_x + ay * in_y) / (sigma_t(c) + ax + ay);
          }
        }
      }
    }
    Vector next = Vector::Zero(NC);
    for (Index a = 0; a < NP; ++a)
      for (Index l = 0; l < NM; ++l) next += (rphi.weights(a) * rmu.weights(l)) * psi.col(a * NM + l);
    res.change = (next - phi).cwiseAbs().maxCoeff();
    res.history.push_back(res.change);
    phi = next;
    res.iterations = it;
    if (res.change < config.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.field.problem = problem.name;
  res.field.angular_rule = "S_N " + std::to_string(NP) + " azimuths x " + std::to_string(NM) + " polar";
  res.field.grid = centres;
  res.field.values = phi;
  if (!res.converged) not_converged("solve_pincell_sn", res);
  return res;
}

}  // namespace rann
