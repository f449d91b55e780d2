#include "run_config.hpp"

#include "rann/analysis.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace rann::cli {

namespace {

using Json = nlohmann::json;

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what + " (got '" + value + "')");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(item);
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  bad_value(key, s, "expected an integer");
}

double parse_real(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  bad_value(key, s, "expected a number");
}

Index parse_count(const std::string& key, const std::string& s) {
  const long long v = parse_int(key, s);
  if (v < 1) bad_value(key, s, "must be a positive count");
  return static_cast<Index>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] != '-') {
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    }
  } catch (const std::exception&) {
  }
  bad_value(key, s, "expected an unsigned 64-bit integer");
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  bad_value(key, s, "expected true or false");
}

std::vector<Index> parse_counts(const std::string& key, const std::string& s) {
  std::vector<Index> out;
  if (s.empty()) return out;
  for (const auto& item : split_list(s)) out.push_back(parse_count(key, item));
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<Json(const RunConfig&)> get;
};

template <class T>
Field scalar(T RunConfig::*member, T (*parse)(const std::string&, const std::string&)) {
  return {[member, parse](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse(k, v); },
          [member](const RunConfig& c) { return Json(c.*member); }};
}

Field text(std::string RunConfig::*member) {
  return {[member](RunConfig& c, const std::string&, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return Json(c.*member); }};
}

Field counts(std::vector<Index> RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_counts(k, v); },
          [member](const RunConfig& c) { return Json(c.*member); }};
}

template <class T>
Field sn(T SnConfig::*member, T (*parse)(const std::string&, const std::string&)) {
  return {[member, parse](RunConfig& c, const std::string& k, const std::string& v) { c.sn.*member = parse(k, v); },
          [member](const RunConfig& c) { return Json(c.sn.*member); }};
}

int parse_iterations(const std::string& key, const std::string& s) {
  const long long v = parse_int(key, s);
  if (v < 1 || v > 100000000) bad_value(key, s, "must be a positive iteration count");
  return static_cast<int>(v);
}

double parse_nonnegative(const std::string& key, const std::string& s) {
  const double v = parse_real(key, s);
  if (!(v >= 0.0)) bad_value(key, s, "must be >= 0");
  return v;
}

double parse_positive(const std::string& key, const std::string& s) {
  const double v = parse_real(key, s);
  if (!(v > 0.0)) bad_value(key, s, "must be > 0");
  return v;
}

const std::map<std::string, Field>& registry() {
  static const std::map<std::string, Field> fields = {
      {"run.problem", text(&RunConfig::problem)},
      {"run.output", text(&RunConfig::output)},
      {"run.reference", text(&RunConfig::reference)},
      {"run.dump_prefix", text(&RunConfig::dump_prefix)},
      {"method.m", counts(&RunConfig::m)},
      {"method.r",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.r.clear();
          for (const auto& item : split_list(v)) c.r.push_back(parse_positive(k, item));
        },
        [](const RunConfig& c) { return Json(c.r); }}},
      {"method.seed", scalar(&RunConfig::seed, parse_u64)},
      {"method.lambda", scalar(&RunConfig::lambda, parse_nonnegative)},
      {"method.chunk_rows", scalar(&RunConfig::chunk_rows, parse_count)},
      {"collocation.interior", counts(&RunConfig::interior)},
      {"collocation.boundary", counts(&RunConfig::boundary)},
      {"collocation.interface", counts(&RunConfig::interface)},
      {"sketch.enabled", scalar(&RunConfig::sketch, parse_bool)},
      {"sketch.d_S", scalar(&RunConfig::d_S, parse_count)},
      {"sketch.n_S", scalar(&RunConfig::n_S, parse_count)},
      {"sketch.seed", scalar(&RunConfig::sketch_seed, parse_u64)},
      {"evaluation.grid", scalar(&RunConfig::grid, parse_count)},
      {"evaluation.angular_nodes", scalar(&RunConfig::angular_nodes, parse_count)},
      {"evaluation.rule", text(&RunConfig::rule)},
      {"baseline.cells", sn(&SnConfig::cells, parse_count)},
      {"baseline.nx", sn(&SnConfig::nx, parse_count)},
      {"baseline.ny", sn(&SnConfig::ny, parse_count)},
      {"baseline.K", sn(&SnConfig::K, parse_count)},
      {"baseline.n_phi", sn(&SnConfig::n_phi, parse_count)},
      {"baseline.n_mu", sn(&SnConfig::n_mu, parse_count)},
      {"baseline.max_iterations", sn(&SnConfig::max_iterations, parse_iterations)},
      {"baseline.tolerance", sn(&SnConfig::tolerance, parse_positive)},
      {"verify.mms_slab_m", scalar(&RunConfig::mms_slab_m, parse_count)},
      {"verify.mms_slab_r", scalar(&RunConfig::mms_slab_r, parse_positive)},
      {"verify.mms_slab_points", scalar(&RunConfig::mms_slab_points, parse_count)},
      {"verify.mms_slab_tolerance", scalar(&RunConfig::mms_slab_tolerance, parse_positive)},
      {"verify.mms_pincell", scalar(&RunConfig::mms_pincell, parse_bool)},
      {"verify.mms_pincell_m", scalar(&RunConfig::mms_pincell_m, parse_count)},
      {"verify.mms_pincell_r", scalar(&RunConfig::mms_pincell_r, parse_positive)},
      {"verify.mms_pincell_points", scalar(&RunConfig::mms_pincell_points, parse_count)},
      {"verify.mms_pincell_tolerance", scalar(&RunConfig::mms_pincell_tolerance, parse_positive)},
      {"verify.graph_K_slab", scalar(&RunConfig::graph_K_slab, parse_count)},
      {"verify.graph_K_pincell", scalar(&RunConfig::graph_K_pincell, parse_count)},
      {"compare.predicted", text(&RunConfig::predicted)},
      {"compare.reference", text(&RunConfig::compare_reference)},
  };
  return fields;
}

bool is_manufactured(const std::string& problem) { return problem == "mms-slab" || problem == "mms-pincell"; }

}  // namespace

void set_key(RunConfig& config, const std::string& dotted_key, const std::string& value) {
  const auto& fields = registry();
  auto it = fields.find(dotted_key);
  if (it == fields.end()) throw std::invalid_argument("unknown config key '" + dotted_key + "'");
  it->second.set(config, dotted_key, value);
}

RunConfig load_config(const std::string& path, bool desk) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument("cannot parse config: " + std::string(e.what()));
  }
  RunConfig config;
  const boost::property_tree::ptree* desk_section = nullptr;
  for (const auto& [section, body] : tree) {
    if (body.empty())
      throw std::invalid_argument(path + ": key '" + section + "' is outside any section");
    if (section == "desk") {
      desk_section = &body;
      continue;
    }
    for (const auto& [key, value] : body) set_key(config, section + "." + key, value.data());
  }
  // An absent or empty [desk] section means the file is already desk-sized.
  if (desk && desk_section) {
    for (const auto& [key, value] : *desk_section) {
      if (key.find('.') == std::string::npos)
        throw std::invalid_argument(path + ": [desk] keys must be written as section.key (got '" + key + "')");
      set_key(config, key, value.data());
    }
  } else if (desk_section) {
    // Validate the overrides even when they are not applied.
    RunConfig scratch;
    for (const auto& [key, value] : *desk_section) set_key(scratch, key, value.data());
  }
  return config;
}

TransportProblem make_problem(const RunConfig& config) {
  if (config.problem == "mms-slab") return make_manufactured_case("slab").problem;
  if (config.problem == "mms-pincell") return make_manufactured_case("pincell").problem;
  return builtin_problem(config.problem);
}

void resolve(RunConfig& config) {
  const TransportProblem p = make_problem(config);
  switch (p.kind()) {
    case GeometryKind::slab1d:
      if (config.interior.empty()) config.interior = {50, 50};
      if (config.boundary.empty()) config.boundary = {500};
      break;
    case GeometryKind::cylinder1d:
      if (config.interior.empty()) config.interior = {30, 30, 30};
      if (config.boundary.empty()) config.boundary = {50, 50};
      if (config.interface.empty() && p.local_networks) config.interface = {30, 30};
      break;
    case GeometryKind::pincell2d:
      if (config.interior.empty()) config.interior = {15, 15, 15, 15};
      if (config.boundary.empty()) config.boundary = {15, 15, 15};
      break;
  }
  if (config.grid == 0) config.grid = p.domain.spatial_dim() == 1 ? 101 : 50;
  try {
    rule_family_from_string(config.rule);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key 'evaluation.rule': " + std::string(e.what()));
  }
  try {
    config.sn.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config section [baseline]: " + std::string(e.what()));
  }
  if (!is_manufactured(config.problem)) {
    const auto names = builtin_problem_names();
    if (std::find(names.begin(), names.end(), config.problem) == names.end())
      throw std::invalid_argument("config key 'run.problem': unknown benchmark '" + config.problem + "'");
  }
}

nlohmann::json to_json(const RunConfig& config) {
  Json out = Json::object();
  for (const auto& [dotted, field] : registry()) {
    const auto dot = dotted.find('.');
    out[dotted.substr(0, dot)][dotted.substr(dot + 1)] = field.get(config);
  }
  return out;
}

SolverConfig solver_config(const RunConfig& config) {
  SolverConfig s;
  s.m = config.m;
  s.r = config.r;
  s.seed = config.seed;
  s.lambda = config.lambda;
  s.chunk_rows = config.chunk_rows;
  s.counts.interior = config.interior;
  s.counts.boundary = config.boundary;
  s.counts.interface = config.interface;
  s.dump_prefix = config.dump_prefix;
  if (config.sketch) s.sketch = SketchSpec{config.d_S, config.n_S, config.sketch_seed};
  return s;
}

}  // namespace rann::cli
