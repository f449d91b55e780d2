#include "rann/flux_csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rann {

namespace {

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  out += buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

double parse_number(const std::string& s, const std::string& path, int line) {
  // strtod rather than stod: subnormal values parse exactly instead of throwing.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw std::runtime_error(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string flux_csv_string(const ScalarFluxField& field) {
  const Index sd = field.grid.cols();
  const int G = field.groups();
  if (sd < 1 || sd > 2) throw std::invalid_argument("flux csv: grid must be 1D or 2D");
  if (field.values.rows() != field.points()) throw std::invalid_argument("flux csv: grid/value count mismatch");
  std::string out;
  const bool plain = sd == 1 && G == 1;
  out += plain ? "x,phi\n" : (sd == 1 ? "x,group,phi\n" : "x,y,group,phi\n");
  for (Index i = 0; i < field.points(); ++i)
    for (int g = 0; g < G; ++g) {
      put(out, field.grid(i, 0));
      out += ',';
      if (sd == 2) {
        put(out, field.grid(i, 1));
        out += ',';
      }
      if (!plain) out += std::to_string(g + 1) + ",";
      put(out, field.values(i, g));
      out += '\n';
    }
  return out;
}

void write_flux_csv(const ScalarFluxField& field, const std::string& path) {
  const std::string text = flux_csv_string(field);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

ScalarFluxField read_flux_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split(line);
  Index sd = 0;
  bool grouped = false;
  if (header == std::vector<std::string>{"x", "phi"}) {
    sd = 1;
  } else if (header == std::vector<std::string>{"x", "group", "phi"}) {
    sd = 1;
    grouped = true;
  } else if (header == std::vector<std::string>{"x", "y", "group", "phi"}) {
    sd = 2;
    grouped = true;
  } else {
    throw std::runtime_error(path + ": unrecognised header '" + line + "'");
  }

  // Points in first-seen order; values keyed by (point, group).
  std::vector<std::vector<double>> coords;
  std::map<std::vector<double>, std::size_t> index;
  std::vector<std::map<int, double>> values;
  int max_group = 1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                               " columns");
    std::vector<double> p;
    for (Index a = 0; a < sd; ++a) p.push_back(parse_number(cells[static_cast<std::size_t>(a)], path, lineno));
    int g = 1;
    if (grouped) {
      g = static_cast<int>(parse_number(cells[static_cast<std::size_t>(sd)], path, lineno));
      if (g < 1) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": group must be >= 1");
    }
    max_group = std::max(max_group, g);
    auto [it, fresh] = index.emplace(p, coords.size());
    if (fresh) {
      coords.push_back(p);
      values.emplace_back();
    }
    values[it->second][g] = parse_number(cells.back(), path, lineno);
  }
  ScalarFluxField f;
  f.problem = path;
  f.angular_rule = "from file";
  f.grid.resize(static_cast<Index>(coords.size()), sd);
  f.values.resize(static_cast<Index>(coords.size()), max_group);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (Index a = 0; a < sd; ++a) f.grid(static_cast<Index>(i), a) = coords[i][static_cast<std::size_t>(a)];
    for (int g = 1; g <= max_group; ++g) {
      auto v = values[i].find(g);
      if (v == values[i].end())
        throw std::runtime_error(path + ": point " + std::to_string(i) + " lacks group " + std::to_string(g));
      f.values(static_cast<Index>(i), g - 1) = v->second;
    }
  }
  return f;
}

}  // namespace rann
