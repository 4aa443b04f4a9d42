#include "mfg/grid_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "mfg/errors.hpp"

namespace mfg {

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(const std::string& path, const GridField& f) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << "i,j,value\n";
  const int n = f.grid().n_side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out << i << ',' << j << ',' << format_exact(f(i, j)) << '\n';
  if (!out) throw UsageError("write failed: " + path);
}

GridField read_field_csv(const std::string& path, int expected_n_side) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open grid file " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,j,value", 0) != 0)
    throw UsageError(path + ": missing 'i,j,value' header");
  struct Row {
    int i, j;
    double v;
  };
  std::vector<Row> rows;
  for (int no = 2; std::getline(in, line); ++no) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Row r{};
    char c1 = 0, c2 = 0;
    if (!(ss >> r.i >> c1 >> r.j >> c2 >> r.v) || c1 != ',' || c2 != ',')
      throw UsageError(path + ":" + std::to_string(no) + ": malformed row");
    rows.push_back(r);
  }
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
  if (n < 2 || static_cast<std::size_t>(n) * n != rows.size())
    throw UsageError(path + ": row count " + std::to_string(rows.size()) + " is not a square grid");
  if (expected_n_side > 0 && n != expected_n_side)
    throw UsageError(path + ": grid side " + std::to_string(n) + " does not match N_h = " +
                     std::to_string(expected_n_side));
  const TorusGrid g(n);
  GridField f(g);
  std::vector<bool> seen(g.size(), false);
  for (const Row& r : rows) {
    if (r.i < 0 || r.i >= n || r.j < 0 || r.j >= n)
      throw UsageError(path + ": index out of range");
    const auto k = g.index(r.i, r.j);
    if (seen[k]) throw UsageError(path + ": duplicate node");
    seen[k] = true;
    f[k] = r.v;
  }
  return f;
}

}  // namespace mfg
