#include <doctest.h>

#include "rann/baseline.hpp"

#include <cmath>

using namespace rann;

namespace {

double benchmark_error(Index cells, std::size_t position) {
  const auto p = builtin_problem("slab-critical");
  SnConfig cfg;
  cfg.cells = cells;
  const SnResult r = solve_slab_sn(p, cfg);
  return pointwise_benchmark_error(r.field, p.domain.spatial[0].hi)[position].error;
}

// Index of the grid point at (x, y), or -1.
Index find_point(const Matrix& grid, double x, double y) {
  for (Index i = 0; i < grid.rows(); ++i)
    if (std::abs(grid(i, 0) - x) < 1e-12 && std::abs(grid(i, 1) - y) < 1e-12) return i;
  return -1;
}

}  // namespace

TEST_CASE("slab source iteration") {
  auto p = builtin_problem("slab-critical");
  SnConfig cfg;
  cfg.cells = 200;
  const SnResult r = solve_slab_sn(p, cfg);
  CHECK(r.converged);
  CHECK(r.normalized);
  CHECK(r.field.points() == 201);
  const auto pts = pointwise_benchmark_error(r.field, p.domain.spatial[0].hi);
  for (const auto& bp : pts) CHECK(bp.error < 1e-2);
  CHECK(pts[1].error < 2e-3);

  // Pure absorber with no source.
  auto absorber = p;
  absorber.xs.nu_sigma_f.clear();
  absorber.xs.sigma_s = {Matrix::Zero(1, 1)};
  absorber.source = [](auto, int, int) { return 0.0; };
  const SnResult z = solve_slab_sn(absorber, cfg);
  CHECK_FALSE(z.normalized);
  CHECK(z.field.values.cwiseAbs().maxCoeff() == 0.0);

  SnConfig bad = cfg;
  bad.K = 1;
  CHECK_THROWS_AS(solve_slab_sn(p, bad), std::invalid_argument);
  CHECK_THROWS_AS(solve_slab_sn(builtin_problem("pincell-vac-case1"), cfg), std::invalid_argument);
}

TEST_CASE("slab refinement reduces the benchmark error") {
  const double coarse = benchmark_error(100, 1), fine = benchmark_error(300, 1);
  MESSAGE("x/b = 0.25 error: M=100 " << coarse << ", M=300 " << fine);
  CHECK(fine < coarse);
}

TEST_CASE("pin-cell sweeps") {
  auto p = builtin_problem("pincell-vac-case1");
  SnConfig cfg;
  cfg.nx = cfg.ny = 20;
  cfg.n_phi = 8;
  cfg.n_mu = 4;

  auto dark = p;
  dark.source = [](auto, int, int) { return 0.0; };
  CHECK(solve_pincell_sn(dark, cfg).field.values.cwiseAbs().maxCoeff() == 0.0);

  auto pure = p;
  for (auto& s : pure.xs.sigma_s) s.setZero();
  const SnResult r = solve_pincell_sn(pure, cfg);
  CHECK(r.converged);
  const Matrix& g = r.field.grid;
  const Vector phi = r.field.values.col(0);
  REQUIRE(g.rows() == 400);
  const double peak = phi.maxCoeff();
  for (Index i = 0; i < g.rows(); ++i) {
    const Index mx = find_point(g, -g(i, 0), g(i, 1));
    const Index my = find_point(g, g(i, 0), -g(i, 1));
    const Index sw = find_point(g, g(i, 1), g(i, 0));
    REQUIRE(mx >= 0);
    REQUIRE(my >= 0);
    REQUIRE(sw >= 0);
    CHECK(std::abs(phi(mx) - phi(i)) <= 1e-10 * peak);
    CHECK(std::abs(phi(my) - phi(i)) <= 1e-10 * peak);
    CHECK(std::abs(phi(sw) - phi(i)) <= 1e-10 * peak);
  }
  const double h = p.domain.spatial[0].length() / 20.0;
  CHECK(phi(find_point(g, 0.5 * h, 0.5 * h)) == doctest::Approx(peak).epsilon(1e-12));

  cfg.n_phi = 6;
  CHECK_THROWS_AS(solve_pincell_sn(p, cfg), std::invalid_argument);
}
