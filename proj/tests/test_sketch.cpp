#include <doctest.h>

#include "rann/random.hpp"
#include "rann/sketch.hpp"
#include "rann/solver.hpp"

#include <cmath>
#include <set>

using namespace rann;

namespace {

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  // Box-Muller on the project stream keeps the draws platform independent.
  RandomStream s(seed);
  Matrix a(rows, cols);
  for (Index i = 0; i < a.size(); ++i) {
    const double u = 1.0 - s.uniform01(), v = s.uniform01();
    a.data()[i] = std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.141592653589793 * v);
  }
  return a;
}

}  // namespace

TEST_CASE("sketch row structure") {
  const SketchOperator op = build_sketch({2, 8, 3}, 5000, 100);
  CHECK(op.rows() == 200);
  CHECK(!op.oversized);
  const auto s = op.matrix();
  CHECK(s.rows() == 200);
  CHECK(s.cols() == 5000);
  for (Index r = 0; r < op.rows(); ++r) {
    std::set<Index> seen;
    int nonzeros = 0;
    for (decltype(s)::InnerIterator it(s, r); it; ++it) {
      ++nonzeros;
      seen.insert(it.col());
      CHECK(std::abs(it.value()) == doctest::Approx(0.353553).epsilon(1e-6));
      CHECK(std::abs(it.value()) == std::sqrt(1.0 / 8.0));
    }
    CHECK(nonzeros == 8);
    CHECK(seen.size() == 8);
  }
  CHECK(build_sketch({3, 8, 3}, 100, 50).oversized);
  CHECK_THROWS_AS(build_sketch({2, 8, 3}, 7, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_sketch({0, 8, 3}, 70, 2), std::invalid_argument);
}

TEST_CASE("sketch with one nonzero per row picks signed rows") {
  const SketchOperator op = build_sketch({3, 1, 9}, 40, 10);
  const Matrix a = gaussian_matrix(40, 6, 2);
  const Matrix sa = apply_sketch(op, a);
  for (Index r = 0; r < op.rows(); ++r) {
    const double sign = op.values[static_cast<std::size_t>(r)];
    CHECK(std::abs(sign) == 1.0);
    CHECK(sa.row(r) == sign * a.row(op.indices[static_cast<std::size_t>(r)]));
  }
  SketchOperator identity;
  identity.input_rows = 5;
  identity.n_S = 1;
  identity.indices = {3};
  identity.values = {1.0};
  const Matrix b = gaussian_matrix(5, 4, 1);
  CHECK(apply_sketch(identity, b).row(0) == b.row(3));
  CHECK(apply_sketch(op, Matrix(Matrix::Zero(40, 6))).isZero(0.0));
  CHECK_THROWS_AS(apply_sketch(op, Matrix(Matrix::Zero(39, 6))), std::invalid_argument);
}

TEST_CASE("sketch determinism and system application") {
  const SketchOperator a = build_sketch({2, 8, 11}, 900, 30), b = build_sketch({2, 8, 11}, 900, 30);
  CHECK(a.indices == b.indices);
  CHECK(a.values == b.values);
  const SketchOperator c = build_sketch({2, 8, 12}, 900, 30);
  CHECK(a.indices != c.indices);

  LinearSystem sys;
  sys.matrix = gaussian_matrix(900, 30, 4);
  sys.rhs = gaussian_matrix(900, 1, 5).col(0);
  sys.row_blocks = {{"interior", 0, 0, 900}};
  sys.col_blocks = {{0, 0, 0, 30}};
  const LinearSystem out = apply_sketch(a, sys);
  CHECK(out.rows() == 60);
  CHECK(out.cols() == 30);
  CHECK((out.matrix - apply_sketch(a, sys.matrix)).norm() == 0.0);
  CHECK((out.rhs - apply_sketch(a, sys.rhs)).norm() == 0.0);
  CHECK_NOTHROW(out.validate());
}

TEST_CASE("sketch preserves squared norms in expectation") {
  // Each sketch row has E (S v)_r^2 = ||v||^2 / N, so E ||S v||^2 = (N_S / N) ||v||^2.
  const Index N = 400, m = 50, dS = 2;
  const Vector v = gaussian_matrix(N, 1, 77).col(0);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const SketchOperator op = build_sketch({dS, 8, seed}, N, m);
    mean += apply_sketch(op, v).squaredNorm() / v.squaredNorm();
  }
  mean /= 200.0;
  const double scaled = mean * static_cast<double>(N) / static_cast<double>(m * dS);
  CHECK(scaled >= 0.8);
  CHECK(scaled <= 1.2);
}

TEST_CASE("sketched least squares stays near the exact residual") {
  // d_S = 4 was chosen empirically:
  // with d_S = 2 (100 rows for 50 unknowns) the expected residual inflation
  // is about sqrt(1 + 50/49) = 1.42, so a third of trials exceed 1.5.
  constexpr Index kSketchMultiple = 4;
  int within = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Matrix a = gaussian_matrix(2000, 50, 1000 + trial);
    const Vector f = a * Vector::Ones(50) + gaussian_matrix(2000, 1, 5000 + trial).col(0);
    const double exact = std::sqrt(solve_lsq(a, f).residual);
    const SketchOperator op = build_sketch({kSketchMultiple, 8, trial}, 2000, 50);
    const Vector alpha = solve_lsq(apply_sketch(op, a), apply_sketch(op, f)).alpha;
    const double sketched = (a * alpha - f).norm();
    within += sketched <= 1.5 * exact ? 1 : 0;
  }
  MESSAGE("sketched residual within 1.5x of exact in " << within << "/100 trials");
  CHECK(within >= 95);
}
