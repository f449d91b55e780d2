#pragma once

#include "rann/basis.hpp"
#include "rann/geometry.hpp"
#include "rann/transport.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace rann {

struct RowBlock {
  std::string label;  // interior, boundary, interface or anchor
  int group = 0;
  Index start = 0;
  Index length = 0;
};

struct ColBlock {
  int subdomain = 0;
  int group = 0;
  Index start = 0;
  Index length = 0;
};

struct LinearSystem {
  Matrix matrix;
  Vector rhs;
  std::vector<RowBlock> row_blocks;
  std::vector<ColBlock> col_blocks;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }
  /// Checks that the blocks tile the matrix and that every entry is finite.
  void validate() const;
};

/// Coefficients of groups solved earlier in the schedule: group -> one vector
/// per subdomain. Their scattering into the current block is moved to the rhs.
using SolvedGroups = std::map<int, std::vector<Vector>>;

struct AssemblyOptions {
  /// Groups solved jointly (0-based). Columns are ordered group-major, then
  /// subdomain.
  std::vector<int> groups{0};
  SolvedGroups solved;
  /// Interior rows evaluated per batch; bounds temporary memory.
  Index chunk_rows = 2048;
};

/// Subdomain index owning a spatial location: the region index for
/// local-network problems, otherwise 0.
int owning_subdomain(const TransportProblem& problem, std::span<const double> point);

/// Number of networks the problem uses.
int subdomain_count(const TransportProblem& problem);

LinearSystem assemble(const TransportProblem& problem, std::span<const RandomFeatureBasis> bases,
                      const CollocationSet& colloc, const AssemblyOptions& options = {});

/// ||A alpha - F||_2^2.
double residual(const LinearSystem& system, const Vector& alpha);

/// Binary dump: 8-byte magic "RANNLSQ1", int64 rows, int64 cols, the matrix
/// as row-major float64, then the rhs as float64. Native byte order.
void write_system(const LinearSystem& system, const std::string& path);
LinearSystem read_system(const std::string& path);

}  // namespace rann
