#include "balo/snapshot.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "balo/config.hpp"
#include "balo/errors.hpp"

namespace balo {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error("snapshot '" + path.string() + "': " + what);
}

double parse_field(const std::string& s, const std::filesystem::path& path, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    io_fail(path, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_snapshot(const State& state, const Grid& grid, const SnapshotMeta& meta,
                    const std::filesystem::path& path) {
  check_shape(state, grid);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) io_fail(path, "cannot open for writing");
  std::fprintf(f, "%s\n", kSnapshotHeader);
  const int rows = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t q = grid.index(i, j);
      std::fprintf(f, "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", state.t, i, j,
                   grid.x_center(i), grid.y_center(j), state.m[q], state.c[q], state.d[q]);
    }
  }
  const bool bad = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || bad) io_fail(path, "write failed");

  std::filesystem::path meta_path = path;
  meta_path += ".meta";
  std::ofstream mf(meta_path);
  if (!mf) io_fail(meta_path, "cannot open for writing");
  mf << "code_version = " << meta.code_version << '\n';
  mf << "label = " << meta.label << '\n';
  mf << "t = " << format_double(state.t) << '\n';
  mf << "dimension = " << grid.dim << '\n';
  mf << "nx = " << grid.nx << '\n';
  mf << "ny = " << (grid.dim == 2 ? grid.ny : 1) << '\n';
  mf << "--- config ---\n" << meta.config_echo;
  if (!mf) io_fail(meta_path, "write failed");
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotHeader) {
    io_fail(path, "missing header '" + std::string(kSnapshotHeader) + "'");
  }
  SnapshotData out;
  int line_no = 1;
  int max_i = -1;
  int max_j = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string cols[8];
    std::stringstream ss(line);
    int n = 0;
    while (n < 8 && std::getline(ss, cols[n], ',')) ++n;
    std::string extra;
    if (n != 8 || std::getline(ss, extra, ',')) {
      io_fail(path, "line " + std::to_string(line_no) + ": expected 8 columns");
    }
    out.t = parse_field(cols[0], path, line_no);
    const int i = static_cast<int>(parse_field(cols[1], path, line_no));
    const int j = static_cast<int>(parse_field(cols[2], path, line_no));
    max_i = std::max(max_i, i);
    max_j = std::max(max_j, j);
    out.x.push_back(parse_field(cols[3], path, line_no));
    out.y.push_back(parse_field(cols[4], path, line_no));
    out.m.push_back(parse_field(cols[5], path, line_no));
    out.c.push_back(parse_field(cols[6], path, line_no));
    out.d.push_back(parse_field(cols[7], path, line_no));
  }
  if (out.m.empty()) io_fail(path, "no data rows");
  out.nx = max_i + 1;
  out.ny = max_j + 1;
  out.dim = out.ny > 1 ? 2 : 1;
  if (static_cast<std::size_t>(out.nx) * static_cast<std::size_t>(out.ny) != out.m.size()) {
    io_fail(path, "row count does not form a rectangular grid");
  }
  return out;
}

State SnapshotData::to_state(const Grid& grid) const {
  if (grid.interior_count() != m.size()) {
    throw ShapeError("snapshot has " + std::to_string(m.size()) + " cells, grid expects " +
                     std::to_string(grid.interior_count()));
  }
  State s;
  s.m.assign(grid.size(), 0.0);
  s.c.assign(grid.size(), 0.0);
  s.d.assign(grid.size(), 0.0);
  s.t = t;
  const int rows = grid.dim == 2 ? grid.ny : 1;
  std::size_t k = 0;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < grid.nx; ++i, ++k) {
      const std::size_t q = grid.index(i, j);
      s.m[q] = m[k];
      s.c[q] = c[k];
      s.d[q] = d[k];
    }
  }
  fill_ghost_neumann(s, grid);
  return s;
}

}  // namespace balo
