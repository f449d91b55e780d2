#include "rann/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

namespace rann {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_inputs(const Matrix& a, const Vector& f, double lambda) {
  if (a.rows() < 1 || a.cols() < 1) throw std::invalid_argument("solve_lsq: empty system");
  if (f.size() != a.rows())
    throw std::invalid_argument("solve_lsq: rhs length " + std::to_string(f.size()) + " does not match " +
                                std::to_string(a.rows()) + " rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("solve_lsq: lambda must be >= 0");
  if (!a.allFinite() || !f.allFinite()) throw std::invalid_argument("solve_lsq: non-finite entries");
}

// Consumes `a`. Tall systems are reduced to the m x m factor first so the
// rank-revealing stage only touches a small matrix.
LsqResult factor_and_solve(Matrix& a, Vector b) {
  const Index n = a.rows();
  const Index m = a.cols();
  LsqResult out;
  if (n >= m) {
    Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(a);
    b.applyOnTheLeft(qr.householderQ().adjoint());
    const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(r);
    out.alpha = cod.solve(b.head(m));
    out.rank = cod.rank();
    out.residual = (r * out.alpha - b.head(m)).squaredNorm() + b.tail(n - m).squaredNorm();
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    out.alpha = cod.solve(b);
    out.rank = cod.rank();
    out.residual = (a * out.alpha - b).squaredNorm();
  }
  return out;
}

LsqResult solve_impl(Matrix& a, const Vector& f, double lambda) {
  check_inputs(a, f, lambda);
  if (lambda == 0.0) return factor_and_solve(a, f);
  const Index n = a.rows();
  const Index m = a.cols();
  Matrix aug(n + m, m);
  aug.topRows(n) = a;
  a.resize(0, 0);
  aug.bottomRows(m) = std::sqrt(lambda) * Matrix::Identity(m, m);
  Vector rhs = Vector::Zero(n + m);
  rhs.head(n) = f;
  return factor_and_solve(aug, rhs);
}

}  // namespace

LsqResult solve_lsq(const Matrix& a, const Vector& f, double lambda) {
  Matrix copy = a;
  return solve_impl(copy, f, lambda);
}

LsqResult solve_lsq(Matrix&& a, const Vector& f, double lambda) {
  Matrix owned = std::move(a);
  return solve_impl(owned, f, lambda);
}

Vector solve_lsq(const LinearSystem& system, double lambda) {
  return solve_lsq(system.matrix, system.rhs, lambda).alpha;
}

std::vector<std::vector<int>> multigroup_schedule(const std::vector<Matrix>& sigma_s) {
  if (sigma_s.empty()) return {};
  const auto G = static_cast<int>(sigma_s.front().rows());
  for (const auto& s : sigma_s)
    if (s.rows() != G || s.cols() != G) throw std::invalid_argument("multigroup_schedule: matrices must be G x G");
  // reach[a][b]: b depends (transitively) on a.
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(G), std::vector<bool>(static_cast<std::size_t>(G), false));
  for (int a = 0; a < G; ++a) {
    reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = true;
    for (int b = 0; b < G; ++b)
      for (const auto& s : sigma_s)
        if (a != b && s(a, b) > 0.0) reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
  }
  for (int k = 0; k < G; ++k)
    for (int a = 0; a < G; ++a)
      for (int b = 0; b < G; ++b)
        if (reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] &&
            reach[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)])
          reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
  auto r = [&](int a, int b) { return reach[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };

  std::vector<std::vector<int>> components;
  std::vector<int> comp_of(static_cast<std::size_t>(G), -1);
  for (int g = 0; g < G; ++g) {
    if (comp_of[static_cast<std::size_t>(g)] >= 0) continue;
    std::vector<int> c;
    for (int h = g; h < G; ++h)
      if (r(g, h) && r(h, g)) {
        c.push_back(h);
        comp_of[static_cast<std::size_t>(h)] = static_cast<int>(components.size());
      }
    components.push_back(c);
  }
  // Kahn's algorithm on the condensation, lowest group index first.
  const auto C = components.size();
  std::vector<bool> done(C, false);
  std::vector<std::vector<int>> order;
  while (order.size() < C) {
    for (std::size_t c = 0; c < C; ++c) {
      if (done[c]) continue;
      bool ready = true;
      for (std::size_t p = 0; p < C && ready; ++p)
        if (p != c && !done[p] && r(components[p].front(), components[c].front())) ready = false;
      if (ready) {
        done[c] = true;
        order.push_back(components[c]);
        break;
      }
    }
  }
  return order;
}

std::vector<RandomFeatureBasis> build_bases(const TransportProblem& problem, const SolverConfig& config) {
  const int S = subdomain_count(problem);
  auto pick = [S](const auto& list, int s, const char* key) {
    if (list.size() == 1) return list.front();
    if (static_cast<int>(list.size()) != S)
      throw std::invalid_argument(std::string("solver: '") + key + "' needs 1 or " + std::to_string(S) + " entries");
    return list[static_cast<std::size_t>(s)];
  };
  std::vector<RandomFeatureBasis> bases;
  for (int s = 0; s < S; ++s)
    bases.push_back(build_basis(pick(config.m, s, "m"), problem.domain.dim(), pick(config.r, s, "r"),
                                config.seed + static_cast<std::uint64_t>(s)));
  return bases;
}

FluxSolution solve_problem(const TransportProblem& problem, const SolverConfig& config) {
  const auto t_start = Clock::now();
  problem.validate();
  FluxSolution sol;
  sol.problem = problem;
  sol.bases = build_bases(problem, config);
  const int S = static_cast<int>(sol.bases.size());

  auto t0 = Clock::now();
  const CollocationSet colloc = make_collocation(problem, config.counts);
  sol.collocation_seconds = seconds_since(t0);

  sol.coefficients.assign(static_cast<std::size_t>(problem.groups()), {});
  std::optional<SketchOperator> sketch;
  AssemblyOptions opts;
  opts.chunk_rows = config.chunk_rows;
  int block_index = 0;
  for (const auto& block : multigroup_schedule(problem.xs.sigma_s)) {
    BlockDiagnostics diag;
    diag.groups = block;
    opts.groups = block;

    t0 = Clock::now();
    LinearSystem sys = assemble(problem, sol.bases, colloc, opts);
    diag.assembly_seconds = seconds_since(t0);
    diag.rows = sys.rows();
    diag.cols = sys.cols();
    if (!config.dump_prefix.empty()) write_system(sys, config.dump_prefix + std::to_string(block_index) + ".bin");

    LsqResult res;
    if (config.sketch) {
      t0 = Clock::now();
      // One operator serves every block with the same row count.
      if (!sketch || sketch->input_rows != sys.rows() || sketch->rows() != sys.cols() * config.sketch->d_S)
        sketch = build_sketch(*config.sketch, sys.rows(), sys.cols());
      LinearSystem small = apply_sketch(*sketch, sys);
      diag.sketch_seconds = seconds_since(t0);
      diag.sketched = true;
      diag.solved_rows = small.rows();
      t0 = Clock::now();
      res = solve_lsq(std::move(small.matrix), small.rhs, config.lambda);
      diag.solve_seconds = seconds_since(t0);
      diag.residual = residual(sys, res.alpha);
    } else {
      diag.solved_rows = sys.rows();
      t0 = Clock::now();
      res = solve_lsq(std::move(sys.matrix), sys.rhs, config.lambda);
      diag.solve_seconds = seconds_since(t0);
      diag.residual = res.residual;
    }
    diag.rank = res.rank;
    if (!res.alpha.allFinite()) throw std::runtime_error("solve_problem: non-finite coefficients");

    for (const auto& cb : sys.col_blocks) {
      auto& per_sub = sol.coefficients[static_cast<std::size_t>(cb.group)];
      per_sub.resize(static_cast<std::size_t>(S));
      per_sub[static_cast<std::size_t>(cb.subdomain)] = res.alpha.segment(cb.start, cb.length);
    }
    for (int g : block) opts.solved[g] = sol.coefficients[static_cast<std::size_t>(g)];
    sol.diagnostics.push_back(diag);
    ++block_index;
  }
  sol.total_seconds = seconds_since(t_start);
  return sol;
}

Vector evaluate_angular_flux(const FluxSolution& solution, const Matrix& points, int group) {
  const auto& problem = solution.problem;
  if (points.cols() != problem.domain.dim())
    throw std::invalid_argument("evaluate_angular_flux: point dimension mismatch");
  if (group < 0 || group >= static_cast<int>(solution.coefficients.size()))
    throw std::invalid_argument("evaluate_angular_flux: group out of range");
  const auto& coeffs = solution.coefficients[static_cast<std::size_t>(group)];
  const Index sd = problem.domain.spatial_dim();
  const auto S = solution.bases.size();

  std::vector<std::vector<Index>> parts(S);
  for (Index i = 0; i < points.rows(); ++i) {
    double p[2] = {points(i, 0), sd > 1 ? points(i, 1) : 0.0};
    parts[static_cast<std::size_t>(owning_subdomain(problem, std::span<const double>(p, static_cast<std::size_t>(sd))))]
        .push_back(i);
  }
  Vector out(points.rows());
  constexpr std::size_t kChunk = 4096;
  for (std::size_t s = 0; s < S; ++s) {
    const auto& idx = parts[s];
    for (std::size_t b = 0; b < idx.size(); b += kChunk) {
      const std::size_t e = std::min(idx.size(), b + kChunk);
      Matrix p(static_cast<Index>(e - b), points.cols());
      for (std::size_t k = b; k < e; ++k) p.row(static_cast<Index>(k - b)) = points.row(idx[k]);
      const Vector v = eval_basis(solution.bases[s], p) * coeffs[s];
      for (std::size_t k = b; k < e; ++k) out(idx[k]) = v(static_cast<Index>(k - b));
    }
  }
  return out;
}

}  // namespace rann
