#include <doctest.h>

#include "rann/analysis.hpp"
#include "rann/quadrature.hpp"
#include "rann/random.hpp"

#include <cmath>
#include <numbers>

using namespace rann;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarFluxField field_1d(const Vector& x, const Vector& v) {
  ScalarFluxField f;
  f.grid = x;
  f.values = v;
  return f;
}

}  // namespace

TEST_CASE("angular integration of simple fluxes") {
  const auto p = builtin_problem("pincell-vac-case1");
  const QuadratureRule rule = angular_rule(p.domain, 16, RuleFamily::gauss_legendre);
  const Matrix grid = flux_grid(p.domain, 3);
  const Vector one = integrate_angular([](auto) { return 1.0; }, grid, rule);
  const Vector mu = integrate_angular([](auto q) { return q[3]; }, grid, rule);
  const Vector mu2 = integrate_angular([](auto q) { return q[3] * q[3]; }, grid, rule);
  for (Index i = 0; i < grid.rows(); ++i) {
    CHECK(one(i) == doctest::Approx(4.0 * kPi).epsilon(1e-13));
    CHECK(std::abs(mu(i)) < 1e-13);
    CHECK(mu2(i) / (4.0 * kPi) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  }

  const auto slab = builtin_problem("slab-critical");
  const QuadratureRule trap = angular_rule(slab.domain, 65);
  CHECK(trap.weights.sum() == doctest::Approx(2.0));
  const Matrix g1 = flux_grid(slab.domain, 11);
  CHECK(g1.rows() == 11);
  CHECK(g1(0, 0) == doctest::Approx(slab.domain.spatial[0].lo));
  CHECK(g1(10, 0) == doctest::Approx(slab.domain.spatial[0].hi));

  const Matrix cells = flux_grid(p.domain, 4);
  const double h = p.domain.spatial[0].length() / 4.0;
  CHECK(cells.rows() == 16);
  CHECK(cells(0, 0) == doctest::Approx(p.domain.spatial[0].lo + 0.5 * h));
  CHECK(rule_family_from_string("gauss_legendre") == RuleFamily::gauss_legendre);
  CHECK_THROWS(rule_family_from_string("simpson"));
}

TEST_CASE("relative l2 error") {
  const Vector x = Vector::LinSpaced(3, 0.0, 1.0);
  Vector r(3);
  r << 1.0, 2.0, 2.0;
  const auto ref = field_1d(x, r);
  CHECK(relative_l2_error(ref, ref) == 0.0);
  CHECK(relative_l2_error(field_1d(x, 1.01 * r), ref) == doctest::Approx(0.01).epsilon(1e-12));
  Vector p(3);
  p << 1.0, 2.0, 4.0;
  // sqrt(4 / 9)
  CHECK(relative_l2_error(field_1d(x, p), ref) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  ScalarFluxField two = ref;
  two.values = Matrix(3, 2);
  two.values << 1, 1, 2, 1, 2, 1;
  ScalarFluxField two_p = two;
  two_p.values(0, 1) = 2.0;
  CHECK(relative_l2_error(two_p, two, 0) == 0.0);
  CHECK(relative_l2_error(two_p, two, 1) == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(relative_l2_error(two_p, two) == doctest::Approx(1.0 / std::sqrt(12.0)));
  CHECK_THROWS(relative_l2_error(field_1d(Vector::Zero(2), Vector::Zero(2)), ref));
}

TEST_CASE("slab benchmark comparison") {
  CHECK(kSlabBenchmarkReference[3] == 0.553290);
  const double b = 2.0;
  const Vector x = Vector::LinSpaced(401, -b, b);
  Vector v(x.size());
  // Piecewise-linear interpolation of the tabulated profile, scaled by 3.
  for (Index i = 0; i < x.size(); ++i) {
    const double t = std::abs(x(i)) / b * 4.0;
    const auto k = std::min<std::size_t>(3, static_cast<std::size_t>(t));
    const double w = t - static_cast<double>(k);
    v(i) = 3.0 * ((1.0 - w) * kSlabBenchmarkReference[k] + w * kSlabBenchmarkReference[k + 1]);
  }
  const auto pts = pointwise_benchmark_error(field_1d(x, v), b);
  REQUIRE(pts.size() == 5);
  CHECK(pts[0].error == 0.0);
  for (const auto& p : pts) {
    CHECK(p.error < 1e-12);
    CHECK(p.reference == doctest::Approx(p.value));
  }
  Vector bumped = v;
  bumped(300) *= 1.1;  // x = b/2
  CHECK(pointwise_benchmark_error(field_1d(x, bumped), b)[2].error == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("manufactured slab source matches the transport operator") {
  const ManufacturedCase mc = make_manufactured_case("a");
  const auto& p = mc.problem;
  CHECK(p.anchors.empty());
  const double b = p.domain.spatial[0].hi;
  const double st = p.xs.total(1, 0), ss = p.xs.transfer(1, 0, 0);
  CHECK(st == 5.0);
  CHECK(ss == 3.0);
  CHECK(mc.angular_integral == doctest::Approx(4.0).epsilon(1e-12));
  const QuadratureRule gl = gauss_legendre_rule(-1.0, 1.0, 8);
  for (double x : {-0.9 * b, -0.2 * b, 0.0, 0.37 * b, b}) {
    for (double mu : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
      const double h = 1e-5;
      auto psi = [&](double xx, double mm) {
        const double q[2] = {xx, mm};
        return mc.exact(q);
      };
      double phi = 0.0;
      for (Index k = 0; k < gl.size(); ++k) phi += gl.weights(k) * psi(x, gl.nodes(k, 0));
      const double expect = mu * (psi(x + h, mu) - psi(x - h, mu)) / (2.0 * h) + st * psi(x, mu) - 0.5 * ss * phi;
      const double q[2] = {x, mu};
      CHECK(p.source_at(q, 0) == doctest::Approx(expect).epsilon(1e-8));
    }
    const double r[1] = {x};
    CHECK(mc.exact_scalar(r) == doctest::Approx(4.0 * (b * b - x * x) / (b * b)).epsilon(1e-12));
  }
  // Vanishing inflow trace: Psi(+-b, mu) = 0.
  const double edge[2] = {b, -0.5};
  CHECK(std::abs(mc.exact(edge)) < 1e-15);
}

TEST_CASE("manufactured pin-cell source matches the transport operator") {
  const ManufacturedCase mc = make_manufactured_case("pincell");
  const auto& p = mc.problem;
  CHECK(mc.angular_integral == doctest::Approx(8.0 * kPi).epsilon(1e-12));
  const QuadratureRule ang = tensor_rule(std::vector<QuadratureRule>{
      gauss_legendre_rule(0.0, 2.0 * kPi, 24), gauss_legendre_rule(-1.0, 1.0, 4)});
  const double b = p.domain.spatial[0].hi;
  RandomStream s(21);
  for (int t = 0; t < 20; ++t) {
    double q[4] = {s.uniform(-b, b), s.uniform(-b, b), s.uniform(0.0, 2.0 * kPi), s.uniform(-1.0, 1.0)};
    const int region = p.domain.region_of(q);
    const double st = p.xs.total(region, 0), ss = p.xs.transfer(region, 0, 0);
    const Eigen::Vector3d om = direction(q[2], q[3]);
    const double h = 1e-5;
    double fwd[4] = {q[0] + h * om(0), q[1] + h * om(1), q[2], q[3]};
    double bwd[4] = {q[0] - h * om(0), q[1] - h * om(1), q[2], q[3]};
    const double stream = (mc.exact(fwd) - mc.exact(bwd)) / (2.0 * h);
    double phi = 0.0;
    for (Index k = 0; k < ang.size(); ++k) {
      const double qq[4] = {q[0], q[1], ang.nodes(k, 0), ang.nodes(k, 1)};
      phi += ang.weights(k) * mc.exact(qq);
    }
    const double expect = stream + st * mc.exact(q) - ss * phi / (4.0 * kPi);
    CHECK(p.source_at(q, 0) == doctest::Approx(expect).epsilon(1e-8));
  }
  CHECK_THROWS_AS(make_manufactured_case("c"), std::invalid_argument);
}

TEST_CASE("graph constant and norm bounds") {
  CHECK(graph_constant(5.0, 5.0) == doctest::Approx(std::sqrt(4.04)).epsilon(1e-15));
  CHECK(graph_constant(1.0, 3.0) == doctest::Approx(std::sqrt(17.0)));
  CHECK_THROWS(graph_constant(0.0, 1.0));
  CHECK_THROWS(graph_constant(2.0, 1.0));

  const auto slab = builtin_problem("slab-critical");
  const TestFunction zero{"zero", [](auto) { return 0.0; }, [](auto) { return 0.0; }};
  const GraphNormReport z = graph_norm_check(slab.domain, slab.xs, 0, zero, 40);
  CHECK(z.graph_norm == 0.0);
  CHECK(z.operator_norm == 0.0);
  CHECK(z.holds());

  // Nonzero inflow trace is rejected.
  const TestFunction one{"one", [](auto) { return 1.0; }, [](auto) { return 0.0; }};
  CHECK_THROWS_AS(graph_norm_check(slab.domain, slab.xs, 0, one, 40), std::invalid_argument);

  for (const auto& f : zero_inflow_test_functions(slab.domain)) {
    const GraphNormReport r = graph_norm_check(slab.domain, slab.xs, 0, f, 80);
    CHECK(r.inflow_trace <= 1e-10);
    CHECK(r.graph_norm > 0.0);
    CHECK(r.holds());
    // Streaming against a finite difference.
    const double q[2] = {0.3, 0.4}, h = 1e-6;
    const double qp[2] = {0.3 + h, 0.4}, qm[2] = {0.3 - h, 0.4};
    CHECK(f.streaming(q) == doctest::Approx(0.4 * (f.value(qp) - f.value(qm)) / (2.0 * h)).epsilon(1e-6));
  }
}

TEST_CASE("graph norm suite holds on every benchmark") {
  GraphNormSuiteOptions opt;
  opt.K_slab = 60;
  opt.K_pincell = 12;
  const auto reports = graph_norm_suite(opt);
  CHECK(reports.size() > 10);
  for (const auto& r : reports) {
    INFO(r.label << " " << r.function << " g" << r.group);
    CHECK(r.holds());
  }
}

TEST_CASE("relative error of a scaled reference is |a - 1|") {
  const Vector x = Vector::LinSpaced(7, -1.0, 1.0);
  const Vector r = (x.array() * 3.0).cos() + 2.0;
  for (double a : {0.25, 0.9, 1.0, 1.5, 7.0})
    CHECK(relative_l2_error(field_1d(x, a * r), field_1d(x, r)) == doctest::Approx(std::abs(a - 1.0)).epsilon(1e-13));
}

TEST_CASE("scalar flux is linear in the coefficients") {
  const auto p = builtin_problem("pincell-refl-case2");
  FluxSolution s;
  s.problem = p;
  s.bases = {build_basis(12, 4, 2.0, 4)};
  RandomStream rs(2);
  Vector c1(12), c2(12);
  for (Index j = 0; j < 12; ++j) {
    c1(j) = rs.uniform(-1.0, 1.0);
    c2(j) = rs.uniform(-1.0, 1.0);
  }
  const Matrix grid = flux_grid(p.domain, 6);
  const QuadratureRule rule = angular_rule(p.domain, 8, RuleFamily::gauss_legendre);
  auto phi = [&](const Vector& c) {
    s.coefficients = {{c}};
    return scalar_flux(s, grid, rule).values;
  };
  const Matrix combined = phi(2.0 * c1 - 0.5 * c2), parts = 2.0 * phi(c1) - 0.5 * phi(c2);
  CHECK((combined - parts).cwiseAbs().maxCoeff() <= 1e-13 * parts.cwiseAbs().maxCoeff());
}
