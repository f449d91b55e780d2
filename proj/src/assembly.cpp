#include "rann/assembly.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <exception>
#include <fstream>
#include <stdexcept>

namespace rann {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'N', 'N', 'L', 'S', 'Q', '1'};

std::span<const double> spatial_of(const Matrix& points, Index i, Index sd, double* buf) {
  for (Index a = 0; a < sd; ++a) buf[a] = points(i, a);
  return {buf, static_cast<std::size_t>(sd)};
}

Matrix gather_rows(const Matrix& points, std::span<const Index> idx) {
  Matrix out(static_cast<Index>(idx.size()), points.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = points.row(idx[k]);
  return out;
}

// Copies `rows` into system rows row0 + idx[k], column offset col0, using
// block copies over runs of consecutive indices.
void scatter_rows(Matrix& target, Index row0, Index col0, std::span<const Index> idx, const Matrix& rows) {
  std::size_t k = 0;
  while (k < idx.size()) {
    std::size_t e = k + 1;
    while (e < idx.size() && idx[e] == idx[e - 1] + 1) ++e;
    const auto len = static_cast<Index>(e - k);
    target.block(row0 + idx[k], col0, len, rows.cols()) += rows.middleRows(static_cast<Index>(k), len);
    k = e;
  }
}

BoundaryBlock select(const BoundaryBlock& block, std::span<const Index> idx) {
  BoundaryBlock out;
  out.points = gather_rows(block.points, idx);
  out.normals = gather_rows(block.normals, idx);
  out.trace_weights.resize(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.trace_weights(static_cast<Index>(k)) = block.trace_weights(idx[k]);
    out.faces.push_back(block.faces[static_cast<std::size_t>(idx[k])]);
    out.tags.push_back(block.tags[static_cast<std::size_t>(idx[k])]);
  }
  return out;
}

std::vector<std::vector<Index>> partition(const TransportProblem& problem, const Matrix& points, int subdomains) {
  std::vector<std::vector<Index>> parts(static_cast<std::size_t>(subdomains));
  const Index sd = problem.domain.spatial_dim();
  double buf[3];
  for (Index i = 0; i < points.rows(); ++i)
    parts[static_cast<std::size_t>(owning_subdomain(problem, spatial_of(points, i, sd, buf)))].push_back(i);
  return parts;
}

}  // namespace

void LinearSystem::validate() const {
  if (rhs.size() != matrix.rows()) throw std::invalid_argument("linear system: rhs length mismatch");
  Index r = 0;
  for (const auto& b : row_blocks) {
    if (b.start != r || b.length < 0) throw std::invalid_argument("linear system: row blocks do not tile the matrix");
    r += b.length;
  }
  Index c = 0;
  for (const auto& b : col_blocks) {
    if (b.start != c || b.length < 0) throw std::invalid_argument("linear system: column blocks do not tile the matrix");
    c += b.length;
  }
  if (r != matrix.rows() || c != matrix.cols())
    throw std::invalid_argument("linear system: block extents do not cover the matrix");
  if (!matrix.allFinite() || !rhs.allFinite()) throw std::invalid_argument("linear system: non-finite entry");
}

int subdomain_count(const TransportProblem& problem) {
  return problem.local_networks ? problem.domain.region_count() : 1;
}

int owning_subdomain(const TransportProblem& problem, std::span<const double> point) {
  if (!problem.local_networks) return 0;
  return problem.domain.region_of(point) - 1;
}

LinearSystem assemble(const TransportProblem& problem, std::span<const RandomFeatureBasis> bases,
                      const CollocationSet& colloc, const AssemblyOptions& options) {
  const int S = subdomain_count(problem);
  if (static_cast<int>(bases.size()) != S)
    throw std::invalid_argument("assemble: expected " + std::to_string(S) + " bases, got " +
                                std::to_string(bases.size()));
  const Index d = problem.domain.dim();
  const Index sd = problem.domain.spatial_dim();
  for (const auto& b : bases)
    if (b.dimension() != d) throw std::invalid_argument("assemble: basis dimension does not match the domain");
  if (colloc.interior.rows() == 0) throw std::invalid_argument("assemble: empty interior collocation set");
  if (colloc.interior.cols() != d) throw std::invalid_argument("assemble: collocation dimension mismatch");
  if (options.groups.empty()) throw std::invalid_argument("assemble: no groups requested");
  if (options.chunk_rows < 1) throw std::invalid_argument("assemble: chunk_rows must be positive");
  for (int g : options.groups)
    if (g < 0 || g >= problem.groups()) throw std::invalid_argument("assemble: group index out of range");
  for (const auto& [g, coeffs] : options.solved) {
    if (g < 0 || g >= problem.groups()) throw std::invalid_argument("assemble: solved group index out of range");
    if (static_cast<int>(coeffs.size()) != S) throw std::invalid_argument("assemble: solved coefficients per subdomain mismatch");
    for (int s = 0; s < S; ++s)
      if (coeffs[static_cast<std::size_t>(s)].size() != bases[static_cast<std::size_t>(s)].size())
        throw std::invalid_argument("assemble: solved coefficient length mismatch");
  }
  check_angular_nodes(colloc.interior, sd, colloc.angular_rule);

  const auto G = static_cast<int>(options.groups.size());
  LinearSystem sys;

  // Columns: group-major, then subdomain.
  std::vector<std::vector<Index>> col0(static_cast<std::size_t>(G), std::vector<Index>(static_cast<std::size_t>(S)));
  Index ncols = 0;
  for (int gi = 0; gi < G; ++gi)
    for (int s = 0; s < S; ++s) {
      const Index m = bases[static_cast<std::size_t>(s)].size();
      col0[static_cast<std::size_t>(gi)][static_cast<std::size_t>(s)] = ncols;
      sys.col_blocks.push_back({s, options.groups[static_cast<std::size_t>(gi)], ncols, m});
      ncols += m;
    }

  const Index n_int = colloc.interior.rows();
  const Index n_bnd = colloc.boundary.size();
  const Index n_ifc = colloc.interface.size();
  const Index n_anc = colloc.anchors.size();
  if (n_ifc > 0 && S < 2) throw std::invalid_argument("assemble: interface points need local networks");
  Index nrows = 0;
  for (int gi = 0; gi < G; ++gi) {
    const int g = options.groups[static_cast<std::size_t>(gi)];
    for (auto [label, len] : {std::pair<const char*, Index>{"interior", n_int}, {"boundary", n_bnd},
                              {"interface", n_ifc}, {"anchor", n_anc}}) {
      if (len == 0) continue;
      sys.row_blocks.push_back({label, g, nrows, len});
      nrows += len;
    }
  }
  sys.matrix = Matrix::Zero(nrows, ncols);
  sys.rhs = Vector::Zero(nrows);

  const auto int_parts = partition(problem, colloc.interior, S);
  const double norm = problem.kernel_norm();

  // Interior work items: (subdomain, begin, end) into int_parts[s].
  struct Chunk {
    int s;
    std::size_t begin, end;
  };
  std::vector<Chunk> chunks;
  for (int s = 0; s < S; ++s) {
    const auto n = int_parts[static_cast<std::size_t>(s)].size();
    for (std::size_t b = 0; b < n; b += static_cast<std::size_t>(options.chunk_rows))
      chunks.push_back({s, b, std::min(n, b + static_cast<std::size_t>(options.chunk_rows))});
  }

  Index row_base = 0;
  for (int gi = 0; gi < G; ++gi) {
    const int g = options.groups[static_cast<std::size_t>(gi)];
    const Index int0 = row_base;

    const auto nchunks = static_cast<long>(chunks.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < nchunks; ++c) {
      try {
        const Chunk& ch = chunks[static_cast<std::size_t>(c)];
        const auto& basis = bases[static_cast<std::size_t>(ch.s)];
        const std::span<const Index> idx(int_parts[static_cast<std::size_t>(ch.s)].data() + ch.begin, ch.end - ch.begin);
        const Matrix P = gather_rows(colloc.interior, idx);
        const auto n = static_cast<Index>(idx.size());

        std::vector<int> region(static_cast<std::size_t>(n));
        double buf[3];
        for (Index i = 0; i < n; ++i)
          region[static_cast<std::size_t>(i)] = problem.domain.region_of(spatial_of(P, i, sd, buf));
        auto coefficients = [&](int from) {
          Vector c(n);
          for (Index i = 0; i < n; ++i) c(i) = norm * problem.xs.transfer(region[static_cast<std::size_t>(i)], from, g);
          return c;
        };

        Matrix moments;
        auto get_moments = [&]() -> const Matrix& {
          if (moments.size() == 0) moments = angular_moments(basis, P, sd, colloc.angular_rule);
          return moments;
        };

        Matrix block = streaming_rows(problem, basis, P, g);
        Vector f = rhs_vector(problem, P, g);
        for (int gj = 0; gj < G; ++gj) {
          const Vector c = coefficients(options.groups[static_cast<std::size_t>(gj)]);
          if ((c.array() == 0.0).all()) continue;
          Matrix scat = -(c.asDiagonal() * get_moments());
          if (gj == gi) {
            block += scat;
          } else {
            scat *= colloc.eta_interior;
            scatter_rows(sys.matrix, int0, col0[static_cast<std::size_t>(gj)][static_cast<std::size_t>(ch.s)], idx, scat);
          }
        }
        for (const auto& [from, coeffs] : options.solved) {
          if (std::find(options.groups.begin(), options.groups.end(), from) != options.groups.end()) continue;
          const Vector c = coefficients(from);
          if ((c.array() == 0.0).all()) continue;
          f += c.cwiseProduct(get_moments() * coeffs[static_cast<std::size_t>(ch.s)]);
        }
        block *= colloc.eta_interior;
        f *= colloc.eta_interior;
        scatter_rows(sys.matrix, int0, col0[static_cast<std::size_t>(gi)][static_cast<std::size_t>(ch.s)], idx, block);
        for (Index i = 0; i < n; ++i) sys.rhs(int0 + idx[static_cast<std::size_t>(i)]) = f(i);
      } catch (...) {
#pragma omp critical(rann_assembly_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    row_base += n_int;

    if (n_bnd > 0) {
      const auto parts = partition(problem, colloc.boundary.points, S);
      for (int s = 0; s < S; ++s) {
        const auto& idx = parts[static_cast<std::size_t>(s)];
        if (idx.empty()) continue;
        Matrix rows = boundary_rows(problem, bases[static_cast<std::size_t>(s)], select(colloc.boundary, idx));
        rows *= colloc.eta_boundary;
        scatter_rows(sys.matrix, row_base, col0[static_cast<std::size_t>(gi)][static_cast<std::size_t>(s)], idx, rows);
      }
      row_base += n_bnd;
    }

    if (n_ifc > 0) {
      const InterfaceBlock& ifc = colloc.interface;
      for (Index i = 0; i < n_ifc; ++i) {
        const auto [from, to] = ifc.region_pairs[static_cast<std::size_t>(i)];
        if (from < 1 || from > S || to < 1 || to > S || from == to)
          throw std::invalid_argument("assemble: interface region pair does not name two subdomains");
        const double w = colloc.eta_interface * std::sqrt(ifc.trace_weights(i));
        const Matrix p = ifc.points.row(i);
        const Matrix v1 = eval_basis(bases[static_cast<std::size_t>(from - 1)], p);
        const Matrix v2 = eval_basis(bases[static_cast<std::size_t>(to - 1)], p);
        sys.matrix.block(row_base + i, col0[static_cast<std::size_t>(gi)][static_cast<std::size_t>(from - 1)], 1, v1.cols()) += w * v1;
        sys.matrix.block(row_base + i, col0[static_cast<std::size_t>(gi)][static_cast<std::size_t>(to - 1)], 1, v2.cols()) -= w * v2;
      }
      row_base += n_ifc;
    }

    if (n_anc > 0) {
      for (Index i = 0; i < n_anc; ++i) {
        double buf[3];
        const int s = owning_subdomain(problem, spatial_of(colloc.anchors.points, i, sd, buf));
        const Matrix v = eval_basis(bases[static_cast<std::size_t>(s)], Matrix(colloc.anchors.points.row(i)));
        sys.matrix.block(row_base + i, col0[static_cast<std::size_t>(gi)][static_cast<std::size_t>(s)], 1, v.cols()) = v;
        sys.rhs(row_base + i) = colloc.anchors.values(i);
      }
      row_base += n_anc;
    }
  }
  if (!sys.matrix.allFinite() || !sys.rhs.allFinite())
    throw std::runtime_error("assemble: non-finite entry in the assembled system");
  return sys;
}

double residual(const LinearSystem& system, const Vector& alpha) {
  if (alpha.size() != system.cols())
    throw std::invalid_argument("residual: coefficient length " + std::to_string(alpha.size()) +
                                " does not match " + std::to_string(system.cols()) + " columns");
  return (system.matrix * alpha - system.rhs).squaredNorm();
}

void write_system(const LinearSystem& system, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::int64_t dims[2] = {system.rows(), system.cols()};
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = system.matrix;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(system.rhs.data()),
            static_cast<std::streamsize>(system.rhs.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed for " + path);
}

LinearSystem read_system(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  std::int64_t dims[2];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0 || dims[0] < 0 || dims[1] < 0)
    throw std::runtime_error(path + " is not a system dump");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dims[0], dims[1]);
  LinearSystem sys;
  sys.rhs.resize(dims[0]);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(sys.rhs.data()), static_cast<std::streamsize>(sys.rhs.size() * sizeof(double)));
  if (!in) throw std::runtime_error(path + " is truncated");
  sys.matrix = rm;
  sys.row_blocks.push_back({"dump", 0, 0, dims[0]});
  sys.col_blocks.push_back({0, 0, 0, dims[1]});
  return sys;
}

}  // namespace rann
