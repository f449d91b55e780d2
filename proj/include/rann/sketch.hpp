#pragma once

#include "rann/assembly.hpp"

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

namespace rann {

struct SketchSpec {
  Index d_S = 2;  // sketch rows = m * d_S
  Index n_S = 8;  // nonzeros per sketch row
  std::uint64_t seed = 0;
};

/// Sparse sign embedding: row r has n_S distinct input rows, each with value
/// +-sqrt(1/n_S).
struct SketchOperator {
  Index input_rows = 0;
  Index n_S = 0;
  std::vector<Index> indices;  // rows() * n_S, sorted within each row
  std::vector<double> values;  // same layout
  /// True when m * d_S exceeded the input row count.
  bool oversized = false;

  Index rows() const { return n_S == 0 ? 0 : static_cast<Index>(indices.size()) / n_S; }
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix() const;
};

SketchOperator build_sketch(const SketchSpec& spec, Index n_rows_in, Index m);

Matrix apply_sketch(const SketchOperator& op, const Matrix& a);
Vector apply_sketch(const SketchOperator& op, const Vector& v);
LinearSystem apply_sketch(const SketchOperator& op, const LinearSystem& system);

}  // namespace rann
