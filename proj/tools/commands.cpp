#include "commands.hpp"

#include "rann/baseline.hpp"
#include "rann/flux_csv.hpp"

#include <cmath>
#include <fcntl.h>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <unistd.h>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rann::cli {

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json benchmark_json(const std::vector<BenchmarkPoint>& points) {
  Json arr = Json::array();
  for (const auto& p : points)
    arr.push_back({{"x_over_b", p.x_over_b}, {"value", p.value}, {"reference", p.reference}, {"error", p.error}});
  return arr;
}

Json diagnostics_json(const FluxSolution& s) {
  Json blocks = Json::array();
  for (const auto& d : s.diagnostics) {
    Json groups = Json::array();
    for (int g : d.groups) groups.push_back(g + 1);
    blocks.push_back({{"groups", groups},
                      {"rows", d.rows},
                      {"cols", d.cols},
                      {"solved_rows", d.solved_rows},
                      {"rank", d.rank},
                      {"residual", d.residual},
                      {"sketched", d.sketched},
                      {"assembly_seconds", d.assembly_seconds},
                      {"sketch_seconds", d.sketch_seconds},
                      {"solve_seconds", d.solve_seconds}});
  }
  return blocks;
}

Json field_summary(const ScalarFluxField& f) {
  Json groups = Json::array();
  for (int g = 0; g < f.groups(); ++g) {
    const auto col = f.values.col(g);
    groups.push_back({{"group", g + 1},
                      {"min", col.minCoeff()},
                      {"max", col.maxCoeff()},
                      {"finite", col.allFinite()}});
  }
  return groups;
}

bool is_manufactured(const std::string& problem) { return problem == "mms-slab" || problem == "mms-pincell"; }

std::string mms_id(const std::string& problem) { return problem == "mms-slab" ? "slab" : "pincell"; }

bool same_grid(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.size(); ++i)
    if (std::abs(a.data()[i] - b.data()[i]) > 1e-12 * (1.0 + std::abs(a.data()[i]))) return false;
  return true;
}

ScalarFluxField interpolate_1d(const ScalarFluxField& ref, const Matrix& grid) {
  ScalarFluxField out = ref;
  out.grid = grid;
  out.values.resize(grid.rows(), ref.groups());
  const Index n = ref.points();
  for (Index p = 0; p < grid.rows(); ++p) {
    const double x = grid(p, 0);
    if (x < ref.grid(0, 0) - 1e-12 || x > ref.grid(n - 1, 0) + 1e-12)
      throw std::invalid_argument("reference grid does not cover x = " + std::to_string(x));
    Index i = 0;
    while (i + 2 < n && ref.grid(i + 1, 0) < x) ++i;
    const double t = (x - ref.grid(i, 0)) / (ref.grid(i + 1, 0) - ref.grid(i, 0));
    out.values.row(p) = (1.0 - t) * ref.values.row(i) + t * ref.values.row(i + 1);
  }
  return out;
}

ScalarFluxField aligned_reference(const ScalarFluxField& predicted, const ScalarFluxField& reference) {
  if (predicted.groups() != reference.groups())
    throw std::invalid_argument("flux fields have different group counts");
  if (same_grid(predicted.grid, reference.grid)) return reference;
  if (predicted.grid.cols() == 1 && reference.grid.cols() == 1 && reference.points() >= 2)
    return interpolate_1d(reference, predicted.grid);
  throw std::invalid_argument("flux fields are sampled on different grids");
}

Json compare_json(const ScalarFluxField& predicted, const ScalarFluxField& reference) {
  const ScalarFluxField ref = aligned_reference(predicted, reference);
  Json out;
  out["points"] = predicted.points();
  out["groups"] = predicted.groups();
  out["interpolated"] = !same_grid(predicted.grid, reference.grid);
  out["relative_l2"] = relative_l2_error(predicted, ref);
  Json per_group = Json::array();
  for (int g = 0; g < predicted.groups(); ++g) {
    const Vector diff = (predicted.values.col(g) - ref.values.col(g)).cwiseAbs();
    per_group.push_back({{"group", g + 1},
                         {"relative_l2", relative_l2_error(predicted, ref, g)},
                         {"max_abs_error", diff.maxCoeff()}});
  }
  out["per_group"] = per_group;
  // Slab fluxes are only defined up to scale (critical problem), so 1D
  // comparisons also report the error after normalizing both at x = 0.
  if (predicted.grid.cols() == 1 && predicted.groups() == 1) {
    const double lo = predicted.grid.col(0).minCoeff(), hi = predicted.grid.col(0).maxCoeff();
    if (lo <= 0.0 && hi >= 0.0) out["normalized_relative_l2"] = normalized_l2_error(predicted, reference);
  }
  return out;
}

void write_pointwise_csv(const fs::path& path, const ScalarFluxField& predicted, const ScalarFluxField& reference) {
  const ScalarFluxField ref = aligned_reference(predicted, reference);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool two_d = predicted.grid.cols() == 2;
  out << (two_d ? "x,y," : "x,") << "group,predicted,reference,abs_error,rel_error\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.16e", v);
    out << buf;
  };
  for (Index i = 0; i < predicted.points(); ++i)
    for (int g = 0; g < predicted.groups(); ++g) {
      const double p = predicted.values(i, g), r = ref.values(i, g);
      const double abs_err = std::abs(p - r);
      put(predicted.grid(i, 0));
      out << ',';
      if (two_d) {
        put(predicted.grid(i, 1));
        out << ',';
      }
      out << g + 1 << ',';
      put(p);
      out << ',';
      put(r);
      out << ',';
      put(abs_err);
      out << ',';
      put(r != 0.0 ? abs_err / std::abs(r) : (abs_err == 0.0 ? 0.0 : INFINITY));
      out << '\n';
    }
}

Json base_report(const RunConfig& config, const std::string& command) {
  return {{"command", command}, {"seed", config.seed}, {"threads", thread_count()}, {"config", to_json(config)}};
}

}  // namespace

OutputLock::OutputLock(const fs::path& directory) : path_(directory / ".rann.lock") {
  fs::create_directories(directory);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0)
    throw std::runtime_error("output directory " + directory.string() + " is in use (lockfile " + path_.string() +
                             " exists)");
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

double compare_fields(const ScalarFluxField& predicted, const ScalarFluxField& reference, int group) {
  return relative_l2_error(predicted, aligned_reference(predicted, reference), group);
}

double normalized_l2_error(const ScalarFluxField& predicted, const ScalarFluxField& reference) {
  if (predicted.grid.cols() != 1 || reference.grid.cols() != 1 || predicted.groups() != 1 || reference.groups() != 1)
    throw std::invalid_argument("normalized comparison needs one-group 1D fields");
  Matrix origin(1, 1);
  origin(0, 0) = 0.0;
  const double p0 = interpolate_1d(predicted, origin).values(0, 0);
  const double r0 = interpolate_1d(reference, origin).values(0, 0);
  if (p0 == 0.0 || r0 == 0.0) throw std::invalid_argument("normalized comparison: flux vanishes at x = 0");
  ScalarFluxField p = predicted, r = aligned_reference(predicted, reference);
  p.values /= p0;
  r.values /= r0;
  return relative_l2_error(p, r);
}

double manufactured_error(const ManufacturedCase& mc, const FluxSolution& solution, const RunConfig& config) {
  const auto& domain = mc.problem.domain;
  const Matrix grid = flux_grid(domain, config.grid);
  const QuadratureRule rule = angular_rule(domain, config.angular_nodes, rule_family_from_string(config.rule));
  return relative_l2_error(scalar_flux(solution, grid, rule), exact_scalar_flux(mc, grid));
}

int run_solve(const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output);
  OutputLock lock(dir);
  const TransportProblem problem = make_problem(config);
  log << "solve: " << problem.name << " (seed " << config.seed << ")\n";

  const FluxSolution solution = solve_problem(problem, solver_config(config));
  const Matrix grid = flux_grid(problem.domain, config.grid);
  const QuadratureRule rule =
      angular_rule(problem.domain, config.angular_nodes, rule_family_from_string(config.rule));
  const ScalarFluxField field = scalar_flux(solution, grid, rule);
  write_flux_csv(field, (dir / "flux.csv").string());

  Json report = base_report(config, "solve");
  report["problem"] = problem.name;
  report["blocks"] = diagnostics_json(solution);
  report["timings"] = {{"collocation_seconds", solution.collocation_seconds},
                       {"total_seconds", solution.total_seconds}};
  report["flux"] = field_summary(field);
  if (problem.name == "slab-critical") report["benchmark"] = benchmark_json(pointwise_benchmark_error(solution, rule));
  if (is_manufactured(config.problem)) {
    const ManufacturedCase mc = make_manufactured_case(mms_id(config.problem));
    report["manufactured_relative_l2"] = relative_l2_error(field, exact_scalar_flux(mc, grid));
  }
  if (!config.reference.empty()) report["reference"] = compare_json(field, read_flux_csv(config.reference));
  write_json(dir / "report.json", report);
  log << "wrote " << (dir / "flux.csv").string() << " and report.json\n";
  return 0;
}

int run_baseline(const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output);
  OutputLock lock(dir);
  const TransportProblem problem = make_problem(config);
  log << "baseline: " << problem.name << "\n";

  SnResult result;
  switch (problem.kind()) {
    case GeometryKind::slab1d:
      result = solve_slab_sn(problem, config.sn);
      break;
    case GeometryKind::pincell2d:
      result = solve_pincell_sn(problem, config.sn);
      break;
    default:
      throw std::invalid_argument("baseline: no discrete-ordinates solver for problem '" + problem.name + "'");
  }
  write_flux_csv(result.field, (dir / "sn_flux.csv").string());

  Json report = base_report(config, "baseline");
  report["problem"] = problem.name;
  report["iterations"] = result.iterations;
  report["final_change"] = result.change;
  report["converged"] = result.converged;
  report["normalized"] = result.normalized;
  report["flux"] = field_summary(result.field);
  if (problem.name == "slab-critical")
    report["benchmark"] = benchmark_json(pointwise_benchmark_error(result.field, problem.domain.spatial[0].hi));
  if (!config.reference.empty()) report["reference"] = compare_json(result.field, read_flux_csv(config.reference));
  write_json(dir / "report.json", report);
  log << "wrote " << (dir / "sn_flux.csv").string() << " after " << result.iterations << " sweeps\n";
  return 0;
}

int run_verify(const RunConfig& config, std::ostream& log) {
  const fs::path dir(config.output);
  OutputLock lock(dir);
  Json report = base_report(config, "verify");
  bool ok = true;

  auto mms = [&](const std::string& id, Index m, double r, Index points, double tol) {
    RunConfig c = config;
    c.problem = "mms-" + id;
    c.m = {m};
    c.r = {r};
    c.interior.clear();
    c.boundary.clear();
    c.interface.clear();
    c.grid = 0;
    c.sketch = false;
    c.lambda = 0.0;
    c.dump_prefix.clear();
    resolve(c);
    c.interior.assign(c.interior.size(), points);
    const ManufacturedCase mc = make_manufactured_case(id);
    const FluxSolution s = solve_problem(mc.problem, solver_config(c));
    const double err = manufactured_error(mc, s, c);
    const bool pass = std::isfinite(err) && err <= tol;
    ok = ok && pass;
    log << "mms-" << id << ": relative l2 " << err << " (tolerance " << tol << ") " << (pass ? "pass" : "FAIL")
        << "\n";
    report["manufactured"].push_back(
        {{"case", id}, {"m", m}, {"r", r}, {"interior", c.interior}, {"relative_l2", err}, {"tolerance", tol},
         {"pass", pass}});
  };
  report["manufactured"] = Json::array();
  mms("slab", config.mms_slab_m, config.mms_slab_r, config.mms_slab_points, config.mms_slab_tolerance);
  if (config.mms_pincell)
    mms("pincell", config.mms_pincell_m, config.mms_pincell_r, config.mms_pincell_points,
        config.mms_pincell_tolerance);

  GraphNormSuiteOptions opts;
  opts.K_slab = config.graph_K_slab;
  opts.K_pincell = config.graph_K_pincell;
  Json graph = Json::array();
  int failures = 0;
  for (const auto& g : graph_norm_suite(opts)) {
    const bool pass = g.holds();
    failures += pass ? 0 : 1;
    graph.push_back({{"cross_sections", g.label},
                     {"function", g.function},
                     {"group", g.group + 1},
                     {"sigma_min", g.sigma_min},
                     {"sigma_max", g.sigma_max},
                     {"c_gr", g.c_gr},
                     {"graph_norm", g.graph_norm},
                     {"operator_norm", g.operator_norm},
                     {"lower_margin", g.lower_margin},
                     {"upper_margin", g.upper_margin},
                     {"pass", pass}});
  }
  ok = ok && failures == 0;
  log << "graph-norm: " << graph.size() - failures << "/" << graph.size() << " cases hold\n";
  report["graph_norm"] = graph;
  report["pass"] = ok;
  write_json(dir / "verify.json", report);
  log << (ok ? "verify: pass\n" : "verify: FAIL\n");
  return ok ? 0 : 1;
}

int run_compare(const RunConfig& config, std::ostream& log) {
  if (config.predicted.empty() || config.compare_reference.empty())
    throw std::invalid_argument("compare: both compare.predicted and compare.reference are required");
  const ScalarFluxField predicted = read_flux_csv(config.predicted);
  const ScalarFluxField reference = read_flux_csv(config.compare_reference);
  const fs::path dir(config.output);
  OutputLock lock(dir);
  Json report = base_report(config, "compare");
  report["predicted"] = config.predicted;
  report["reference"] = config.compare_reference;
  report["comparison"] = compare_json(predicted, reference);
  write_pointwise_csv(dir / "pointwise.csv", predicted, reference);
  write_json(dir / "compare.json", report);
  log << "relative l2 error " << report["comparison"]["relative_l2"].get<double>() << "\n";
  return 0;
}

}  // namespace rann::cli
