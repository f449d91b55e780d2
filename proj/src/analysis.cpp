#include "rann/analysis.hpp"

#include "rann/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rann {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Index kReferenceNodes = 512;

void check_grid(const PhaseSpaceDomain& domain, const Matrix& grid, const char* who) {
  if (grid.cols() != domain.spatial_dim())
    throw std::invalid_argument(std::string(who) + ": grid has " + std::to_string(grid.cols()) +
                                " columns, expected " + std::to_string(domain.spatial_dim()));
}

std::string describe(const QuadratureRule& rule) {
  return std::to_string(rule.size()) + "-node angular rule, dim " + std::to_string(rule.dim());
}

QuadratureRule rule_1d(const Interval& iv, Index K, RuleFamily family) {
  return family == RuleFamily::trapezoid ? trapezoid_rule(iv.lo, iv.hi, K) : gauss_legendre_rule(iv.lo, iv.hi, K);
}

QuadratureRule spatial_rule(const PhaseSpaceDomain& domain, Index K) {
  std::vector<QuadratureRule> rules;
  for (const auto& iv : domain.spatial) rules.push_back(gauss_legendre_rule(iv.lo, iv.hi, K));
  return tensor_rule(rules);
}

// Omega . n for an outward face normal at angular coordinates `ang`.
double normal_dot(const PhaseSpaceDomain& domain, const Eigen::Vector3d& n, std::span<const double> ang) {
  if (domain.kind == GeometryKind::slab1d) return n.x() * ang[0];
  return n.dot(direction(ang[0], ang[1]));
}

}  // namespace

std::string_view to_string(RuleFamily family) {
  return family == RuleFamily::trapezoid ? "trapezoid" : "gauss";
}

RuleFamily rule_family_from_string(std::string_view name) {
  if (name == "trapezoid") return RuleFamily::trapezoid;
  if (name == "gauss" || name == "gauss_legendre") return RuleFamily::gauss_legendre;
  throw std::invalid_argument("unknown quadrature family '" + std::string(name) + "'");
}

QuadratureRule angular_rule(const PhaseSpaceDomain& domain, Index K, RuleFamily family) {
  std::vector<QuadratureRule> rules;
  for (const auto& iv : domain.angular) rules.push_back(rule_1d(iv, K, family));
  return tensor_rule(rules);
}

Matrix flux_grid(const PhaseSpaceDomain& domain, Index n) {
  if (n < 2) throw std::invalid_argument("flux_grid: need at least 2 points per axis");
  const Index sd = domain.spatial_dim();
  if (sd == 1) {
    Matrix g(n, 1);
    const auto& iv = domain.spatial[0];
    for (Index i = 0; i < n; ++i) g(i, 0) = iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
  }
  Matrix g(n * n, 2);
  const auto& ix = domain.spatial[0];
  const auto& iy = domain.spatial[1];
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      g(i * n + j, 0) = ix.lo + (ix.hi - ix.lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      g(i * n + j, 1) = iy.lo + (iy.hi - iy.lo) * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    }
  return g;
}

ScalarFluxField scalar_flux(const FluxSolution& solution, const Matrix& grid, const QuadratureRule& rule) {
  const auto& problem = solution.problem;
  check_grid(problem.domain, grid, "scalar_flux");
  if (rule.dim() != problem.domain.angular_dim())
    throw std::invalid_argument("scalar_flux: angular rule dimension does not match the geometry");
  const Index sd = problem.domain.spatial_dim();
  const Index K = rule.size();
  const auto G = static_cast<Index>(solution.coefficients.size());
  const auto S = solution.bases.size();

  // Coefficient matrices m_s x G.
  std::vector<Matrix> coeffs(S);
  for (std::size_t s = 0; s < S; ++s) {
    coeffs[s].resize(solution.bases[s].size(), G);
    for (Index g = 0; g < G; ++g) coeffs[s].col(g) = solution.coefficients[static_cast<std::size_t>(g)][s];
  }

  std::vector<std::vector<Index>> parts(S);
  for (Index i = 0; i < grid.rows(); ++i) {
    double p[2] = {grid(i, 0), sd > 1 ? grid(i, 1) : 0.0};
    parts[static_cast<std::size_t>(owning_subdomain(problem, std::span<const double>(p, static_cast<std::size_t>(sd))))]
        .push_back(i);
  }

  struct Chunk {
    std::size_t s, begin, end;
  };
  const std::size_t per_chunk = std::max<std::size_t>(1, 16384 / static_cast<std::size_t>(K));
  std::vector<Chunk> chunks;
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t b = 0; b < parts[s].size(); b += per_chunk)
      chunks.push_back({s, b, std::min(parts[s].size(), b + per_chunk)});

  ScalarFluxField field;
  field.problem = problem.name;
  field.angular_rule = describe(rule);
  field.grid = grid;
  field.values.resize(grid.rows(), G);
  const auto nchunks = static_cast<long>(chunks.size());
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < nchunks; ++c) {
    const Chunk& ch = chunks[static_cast<std::size_t>(c)];
    const auto B = static_cast<Index>(ch.end - ch.begin);
    Matrix pts(B * K, problem.domain.dim());
    for (Index b = 0; b < B; ++b) {
      const Index i = parts[ch.s][ch.begin + static_cast<std::size_t>(b)];
      pts.block(b * K, 0, K, sd) = grid.row(i).replicate(K, 1);
      pts.block(b * K, sd, K, rule.dim()) = rule.nodes;
    }
    const Matrix E = eval_basis(solution.bases[ch.s], pts);
    Matrix moments(B, E.cols());
    for (Index b = 0; b < B; ++b) moments.row(b) = rule.weights.transpose() * E.middleRows(b * K, K);
    const Matrix vals = moments * coeffs[ch.s];
    for (Index b = 0; b < B; ++b) field.values.row(parts[ch.s][ch.begin + static_cast<std::size_t>(b)]) = vals.row(b);
  }
  return field;
}

Vector integrate_angular(const std::function<double(std::span<const double>)>& psi, const Matrix& grid,
                         const QuadratureRule& rule) {
  const Index sd = grid.cols();
  Vector out(grid.rows());
  std::vector<double> p(static_cast<std::size_t>(sd + rule.dim()));
  for (Index i = 0; i < grid.rows(); ++i) {
    for (Index a = 0; a < sd; ++a) p[static_cast<std::size_t>(a)] = grid(i, a);
    double acc = 0.0;
    for (Index k = 0; k < rule.size(); ++k) {
      for (Index a = 0; a < rule.dim(); ++a) p[static_cast<std::size_t>(sd + a)] = rule.nodes(k, a);
      acc += rule.weights(k) * psi(p);
    }
    out(i) = acc;
  }
  return out;
}

double relative_l2_error(const ScalarFluxField& predicted, const ScalarFluxField& reference, int group) {
  if (predicted.points() != reference.points() || predicted.grid.cols() != reference.grid.cols())
    throw std::invalid_argument("relative_l2_error: grids differ in size");
  if ((predicted.grid - reference.grid).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("relative_l2_error: grid coordinates differ");
  if (predicted.groups() != reference.groups())
    throw std::invalid_argument("relative_l2_error: group counts differ");
  if (group >= predicted.groups()) throw std::invalid_argument("relative_l2_error: group out of range");
  const Matrix p = group < 0 ? predicted.values : Matrix(predicted.values.col(group));
  const Matrix r = group < 0 ? reference.values : Matrix(reference.values.col(group));
  const double den = r.squaredNorm();
  if (den == 0.0) throw std::invalid_argument("relative_l2_error: reference has zero norm");
  return std::sqrt((p - r).squaredNorm() / den);
}

std::vector<BenchmarkPoint> pointwise_benchmark_error(const FluxSolution& solution, const QuadratureRule& rule) {
  if (solution.problem.kind() != GeometryKind::slab1d)
    throw std::invalid_argument("pointwise_benchmark_error: slab solution required");
  const double b = solution.problem.domain.spatial[0].hi;
  Matrix grid(static_cast<Index>(kSlabBenchmarkPositions.size()), 1);
  for (std::size_t t = 0; t < kSlabBenchmarkPositions.size(); ++t)
    grid(static_cast<Index>(t), 0) = kSlabBenchmarkPositions[t] * b;
  const ScalarFluxField f = scalar_flux(solution, grid, rule);
  std::vector<BenchmarkPoint> out;
  for (std::size_t t = 0; t < kSlabBenchmarkPositions.size(); ++t) {
    BenchmarkPoint bp;
    bp.x_over_b = kSlabBenchmarkPositions[t];
    bp.value = f.values(static_cast<Index>(t), 0) / f.values(0, 0);
    bp.reference = kSlabBenchmarkReference[t];
    bp.error = std::abs(bp.value - bp.reference) / bp.reference;
    out.push_back(bp);
  }
  return out;
}

std::vector<BenchmarkPoint> pointwise_benchmark_error(const ScalarFluxField& field, double half_width) {
  if (field.grid.cols() != 1 || field.points() < 2)
    throw std::invalid_argument("pointwise_benchmark_error: slab field with at least 2 points required");
  auto interp = [&](double x) {
    const Index n = field.points();
    Index i = 0;
    while (i + 2 < n && field.grid(i + 1, 0) < x) ++i;
    const double x0 = field.grid(i, 0), x1 = field.grid(i + 1, 0);
    const double t = (x - x0) / (x1 - x0);
    return (1.0 - t) * field.values(i, 0) + t * field.values(i + 1, 0);
  };
  const double phi0 = interp(0.0);
  std::vector<BenchmarkPoint> out;
  for (std::size_t t = 0; t < kSlabBenchmarkPositions.size(); ++t) {
    BenchmarkPoint bp;
    bp.x_over_b = kSlabBenchmarkPositions[t];
    bp.value = interp(kSlabBenchmarkPositions[t] * half_width) / phi0;
    bp.reference = kSlabBenchmarkReference[t];
    bp.error = std::abs(bp.value - bp.reference) / bp.reference;
    out.push_back(bp);
  }
  return out;
}

ManufacturedCase make_manufactured_case(std::string_view id) {
  ManufacturedCase mc;
  if (id == "slab" || id == "a") {
    TransportProblem p = builtin_problem("slab-critical");
    p.name = "mms-slab";
    p.anchors.clear();
    p.xs.nu_sigma_f.clear();
    const double b = p.domain.spatial[0].hi;
    const QuadratureRule ref = trapezoid_rule(-1.0, 1.0, kReferenceNodes);
    const double G = ref.integrate([](const auto& n) { return 2.0 + n(0); });
    auto spatial = [b](double x) { return (b * b - x * x) / (b * b); };
    auto dspatial = [b](double x) { return -2.0 * x / (b * b); };
    const CrossSections xs = p.xs;
    const double norm = p.kernel_norm();
    p.source = [=](std::span<const double> q, int region, int group) {
      const double x = q[0], mu = q[1];
      return mu * dspatial(x) * (2.0 + mu) + xs.total(region, group) * spatial(x) * (2.0 + mu) -
             norm * xs.transfer(region, group, group) * spatial(x) * G;
    };
    mc.exact = [=](std::span<const double> q) { return spatial(q[0]) * (2.0 + q[1]); };
    mc.exact_scalar = [=](std::span<const double> r) { return spatial(r[0]) * G; };
    mc.angular_integral = G;
    mc.id = "slab";
    mc.problem = std::move(p);
  } else if (id == "pincell" || id == "b") {
    TransportProblem p = builtin_problem("pincell-vac-case1");
    p.name = "mms-pincell";
    const double b = p.domain.spatial[0].hi;
    const QuadratureRule ref = tensor_rule(std::vector<QuadratureRule>{
        trapezoid_rule(0.0, 2.0 * kPi, kReferenceNodes), trapezoid_rule(-1.0, 1.0, kReferenceNodes)});
    const double G = ref.integrate([](const auto& n) { return 2.0 + n(1) * std::cos(n(0)); });
    const double k = kPi / (2.0 * b);
    const CrossSections xs = p.xs;
    const double norm = p.kernel_norm();
    p.source = [=](std::span<const double> q, int region, int group) {
      const double cx = std::cos(k * q[0]), cy = std::cos(k * q[1]);
      const double phi = q[2], mu = q[3];
      const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      const double ang = 2.0 + mu * std::cos(phi);
      const double stream = s * (std::cos(phi) * (-k * std::sin(k * q[0]) * cy) +
                                 std::sin(phi) * (-k * cx * std::sin(k * q[1]))) * ang;
      return stream + xs.total(region, group) * cx * cy * ang - norm * xs.transfer(region, group, group) * cx * cy * G;
    };
    mc.exact = [=](std::span<const double> q) {
      return std::cos(k * q[0]) * std::cos(k * q[1]) * (2.0 + q[3] * std::cos(q[2]));
    };
    mc.exact_scalar = [=](std::span<const double> r) { return std::cos(k * r[0]) * std::cos(k * r[1]) * G; };
    mc.angular_integral = G;
    mc.id = "pincell";
    mc.problem = std::move(p);
  } else {
    throw std::invalid_argument("unknown manufactured case '" + std::string(id) + "'");
  }
  mc.problem.validate();
  return mc;
}

ScalarFluxField exact_scalar_flux(const ManufacturedCase& mc, const Matrix& grid) {
  check_grid(mc.problem.domain, grid, "exact_scalar_flux");
  ScalarFluxField f;
  f.problem = mc.problem.name;
  f.angular_rule = "closed form";
  f.grid = grid;
  f.values.resize(grid.rows(), 1);
  std::vector<double> r(static_cast<std::size_t>(grid.cols()));
  for (Index i = 0; i < grid.rows(); ++i) {
    for (Index a = 0; a < grid.cols(); ++a) r[static_cast<std::size_t>(a)] = grid(i, a);
    f.values(i, 0) = mc.exact_scalar(r);
  }
  return f;
}

double graph_constant(double sigma_min, double sigma_max) {
  if (!(sigma_min > 0.0) || sigma_max < sigma_min)
    throw std::invalid_argument("graph_constant: need 0 < sigma_min <= sigma_max");
  const double q = 1.0 + sigma_max / sigma_min;
  return std::sqrt(1.0 / (sigma_min * sigma_min) + q * q);
}

std::vector<TestFunction> zero_inflow_test_functions(const PhaseSpaceDomain& domain) {
  std::vector<TestFunction> out;
  const double xlo = domain.spatial.at(0).lo, xhi = domain.spatial.at(0).hi;
  if (domain.kind == GeometryKind::slab1d) {
    out.push_back({"slab-bubble", [=](auto q) { return (q[0] - xlo) * (xhi - q[0]); },
                   [=](auto q) { return q[1] * (xhi + xlo - 2.0 * q[0]); }});
    out.push_back({"slab-bubble-aniso", [=](auto q) { return (q[0] - xlo) * (xhi - q[0]) * (2.0 + q[1]); },
                   [=](auto q) { return q[1] * (xhi + xlo - 2.0 * q[0]) * (2.0 + q[1]); }});
    // Vanishes on the inflow half of each face only.
    out.push_back({"slab-upwind",
                   [=](auto q) {
                     return q[1] >= 0.0 ? (q[0] - xlo) * (q[0] - xlo) * (1.0 + q[1])
                                        : (xhi - q[0]) * (xhi - q[0]) * (1.0 - q[1]);
                   },
                   [=](auto q) {
                     return q[1] >= 0.0 ? q[1] * 2.0 * (q[0] - xlo) * (1.0 + q[1])
                                        : -q[1] * 2.0 * (xhi - q[0]) * (1.0 - q[1]);
                   }});
    return out;
  }
  if (domain.kind != GeometryKind::pincell2d)
    throw std::invalid_argument("zero_inflow_test_functions: slab or pin-cell phase space required");
  const double ylo = domain.spatial.at(1).lo, yhi = domain.spatial.at(1).hi;
  const double kx = kPi / (xhi - xlo), ky = kPi / (yhi - ylo);
  auto stream = [=](std::span<const double> q, double ang) {
    const double s = std::sqrt(std::max(0.0, 1.0 - q[3] * q[3]));
    const double sx = std::sin(kx * (q[0] - xlo)), sy = std::sin(ky * (q[1] - ylo));
    const double dx = kx * std::cos(kx * (q[0] - xlo)) * sy, dy = ky * sx * std::cos(ky * (q[1] - ylo));
    return s * (std::cos(q[2]) * dx + std::sin(q[2]) * dy) * ang;
  };
  auto bump = [=](std::span<const double> q) { return std::sin(kx * (q[0] - xlo)) * std::sin(ky * (q[1] - ylo)); };
  out.push_back({"box-sine", [=](auto q) { return bump(q); }, [=](auto q) { return stream(q, 1.0); }});
  out.push_back({"box-sine-aniso", [=](auto q) { return bump(q) * (2.0 + q[3] * std::cos(q[2])); },
                 [=](auto q) { return stream(q, 2.0 + q[3] * std::cos(q[2])); }});
  return out;
}

GraphNormReport graph_norm_check(const PhaseSpaceDomain& domain, const CrossSections& xs, int group,
                                 const TestFunction& f, Index K) {
  if (K < 2) throw std::invalid_argument("graph_norm_check: K must be at least 2");
  if (group < 0 || group >= xs.groups) throw std::invalid_argument("graph_norm_check: group out of range");
  const Index sd = domain.spatial_dim();
  const Index ad = domain.angular_dim();
  GraphNormReport rep;
  rep.function = f.name;
  rep.group = group;
  rep.sigma_min = xs.min_total(group);
  rep.sigma_max = xs.max_total(group);
  rep.c_gr = graph_constant(rep.sigma_min, rep.sigma_max);

  // Inflow trace over every face, free axes by Gauss-Legendre.
  std::vector<double> q(static_cast<std::size_t>(sd + ad));
  for (Face face : domain.faces) {
    const Eigen::Vector3d n = domain.face_normal(face);
    const Index fixed = (face == Face::x_lo || face == Face::x_hi) ? 0 : 1;
    const double at = (face == Face::x_lo || face == Face::y_lo) ? domain.spatial[static_cast<std::size_t>(fixed)].lo
                                                                 : domain.spatial[static_cast<std::size_t>(fixed)].hi;
    std::vector<QuadratureRule> rules;
    for (Index a = 0; a < sd; ++a)
      if (a != fixed) rules.push_back(gauss_legendre_rule(domain.spatial[static_cast<std::size_t>(a)].lo,
                                                          domain.spatial[static_cast<std::size_t>(a)].hi, K));
    for (const auto& iv : domain.angular) rules.push_back(gauss_legendre_rule(iv.lo, iv.hi, K));
    const QuadratureRule fr = tensor_rule(rules);
    for (Index k = 0; k < fr.size(); ++k) {
      Index c = 0;
      for (Index a = 0; a < sd; ++a) q[static_cast<std::size_t>(a)] = a == fixed ? at : fr.nodes(k, c++);
      for (Index a = 0; a < ad; ++a) q[static_cast<std::size_t>(sd + a)] = fr.nodes(k, c++);
      const double nd = normal_dot(domain, n, std::span<const double>(q).subspan(static_cast<std::size_t>(sd)));
      if (nd < 0.0) {
        const double v = f.value(q);
        rep.inflow_trace += fr.weights(k) * (-nd) * v * v;
      }
    }
  }
  if (rep.inflow_trace > 1e-10)
    throw std::invalid_argument("graph_norm_check: test function '" + f.name + "' has inflow trace " +
                                std::to_string(rep.inflow_trace));

  const QuadratureRule sr = spatial_rule(domain, K);
  const QuadratureRule ar = angular_rule(domain, K, RuleFamily::gauss_legendre);
  double l2 = 0.0, stream2 = 0.0, op2 = 0.0;
  for (Index i = 0; i < sr.size(); ++i) {
    for (Index a = 0; a < sd; ++a) q[static_cast<std::size_t>(a)] = sr.nodes(i, a);
    const double sigma = xs.total(domain.region_of(std::span<const double>(q).first(static_cast<std::size_t>(sd))), group);
    double l2_i = 0.0, s2_i = 0.0, o2_i = 0.0;
    for (Index k = 0; k < ar.size(); ++k) {
      for (Index a = 0; a < ad; ++a) q[static_cast<std::size_t>(sd + a)] = ar.nodes(k, a);
      const double v = f.value(q);
      const double s = f.streaming(q);
      l2_i += ar.weights(k) * v * v;
      s2_i += ar.weights(k) * s * s;
      o2_i += ar.weights(k) * (s + sigma * v) * (s + sigma * v);
    }
    l2 += sr.weights(i) * l2_i;
    stream2 += sr.weights(i) * s2_i;
    op2 += sr.weights(i) * o2_i;
  }
  rep.graph_norm = std::sqrt(l2 + stream2);
  rep.operator_norm = std::sqrt(op2);
  rep.lower_margin = rep.c_gr * rep.operator_norm - rep.graph_norm;
  rep.upper_margin = (1.0 + rep.sigma_max) * rep.graph_norm - rep.operator_norm;
  return rep;
}

std::vector<GraphNormReport> graph_norm_suite(const GraphNormSuiteOptions& options) {
  std::vector<GraphNormReport> out;
  auto run = [&](const std::string& label, const PhaseSpaceDomain& domain, const CrossSections& xs, Index K) {
    for (const auto& f : zero_inflow_test_functions(domain))
      for (int g = 0; g < xs.groups; ++g) {
        GraphNormReport r = graph_norm_check(domain, xs, g, f, K);
        r.label = label;
        out.push_back(r);
      }
  };
  {
    const auto p = builtin_problem("slab-critical");
    run(p.name, p.domain, p.xs, options.K_slab);
  }
  for (const char* name : {"cylinder-case1", "cylinder-case2"}) {
    const auto p = builtin_problem(name);
    PhaseSpaceDomain d;
    d.kind = GeometryKind::slab1d;
    d.spatial = p.domain.spatial;
    d.angular = {{-1.0, 1.0}};
    d.regions = p.domain.regions;
    d.faces = {Face::x_lo, Face::x_hi};
    d.validate();
    run(p.name, d, p.xs, options.K_slab);
  }
  for (const char* name : {"pincell-vac-case1", "pincell-vac-case2", "pincell-vac-case3", "pincell-7g"}) {
    const auto p = builtin_problem(name);
    run(p.name, p.domain, p.xs, options.K_pincell);
  }
  return out;
}

}  // namespace rann
