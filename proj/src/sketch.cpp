#include "rann/sketch.hpp"

#include "rann/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rann {

namespace {

void check_rows(const SketchOperator& op, Index rows) {
  if (rows != op.input_rows)
    throw std::invalid_argument("apply_sketch: sketch built for " + std::to_string(op.input_rows) +
                                " rows, system has " + std::to_string(rows));
}

}  // namespace

SketchOperator build_sketch(const SketchSpec& spec, Index n_rows_in, Index m) {
  if (spec.d_S < 1 || spec.n_S < 1 || m < 1)
    throw std::invalid_argument("build_sketch: d_S, n_S and m must be positive");
  if (spec.n_S > n_rows_in)
    throw std::invalid_argument("build_sketch: n_S = " + std::to_string(spec.n_S) + " exceeds the " +
                                std::to_string(n_rows_in) + " input rows");
  SketchOperator op;
  op.input_rows = n_rows_in;
  op.n_S = spec.n_S;
  op.oversized = m * spec.d_S > n_rows_in;
  const Index rows = m * spec.d_S;
  const double scale = std::sqrt(1.0 / static_cast<double>(spec.n_S));
  op.indices.reserve(static_cast<std::size_t>(rows * spec.n_S));
  op.values.reserve(static_cast<std::size_t>(rows * spec.n_S));

  RandomStream rng(spec.seed);
  std::vector<Index> pick;
  for (Index r = 0; r < rows; ++r) {
    // Floyd's algorithm: n_S distinct indices from [0, n_rows_in).
    pick.clear();
    for (Index j = n_rows_in - spec.n_S; j < n_rows_in; ++j) {
      const auto t = static_cast<Index>(rng.below(static_cast<std::uint64_t>(j) + 1));
      pick.push_back(std::find(pick.begin(), pick.end(), t) == pick.end() ? t : j);
    }
    std::sort(pick.begin(), pick.end());
    for (Index i : pick) {
      op.indices.push_back(i);
      op.values.push_back(rng.coin() ? scale : -scale);
    }
  }
  return op;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> SketchOperator::matrix() const {
  Eigen::SparseMatrix<double, Eigen::RowMajor> s(rows(), input_rows);
  s.reserve(Eigen::VectorXi::Constant(rows(), static_cast<int>(n_S)));
  for (Index r = 0; r < rows(); ++r)
    for (Index k = 0; k < n_S; ++k) {
      const auto p = static_cast<std::size_t>(r * n_S + k);
      s.insert(r, indices[p]) = values[p];
    }
  s.makeCompressed();
  return s;
}

Matrix apply_sketch(const SketchOperator& op, const Matrix& a) {
  check_rows(op, a.rows());
  return op.matrix() * a;
}

Vector apply_sketch(const SketchOperator& op, const Vector& v) {
  check_rows(op, v.size());
  return op.matrix() * v;
}

LinearSystem apply_sketch(const SketchOperator& op, const LinearSystem& system) {
  check_rows(op, system.rows());
  const auto s = op.matrix();
  LinearSystem out;
  out.matrix = s * system.matrix;
  out.rhs = s * system.rhs;
  out.row_blocks.push_back({"sketch", 0, 0, op.rows()});
  out.col_blocks = system.col_blocks;
  return out;
}

}  // namespace rann
