#include "balo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "balo/errors.hpp"

namespace balo {

Grid Grid::make(int dim, int nx, double lx, int ny, double ly) {
  if (dim != 1 && dim != 2) {
    throw ConfigError("dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (nx < 4) throw ConfigError("nx must be >= 4");
  if (!(lx > 0.0) || !std::isfinite(lx)) throw ConfigError("lx must be > 0");
  Grid g;
  g.dim = dim;
  g.nx = nx;
  g.lx = lx;
  g.dx = lx / nx;
  if (dim == 2) {
    if (ny < 4) throw ConfigError("ny must be >= 4 in 2D");
    if (!(ly > 0.0) || !std::isfinite(ly)) throw ConfigError("ly must be > 0");
    g.ny = ny;
    g.ly = ly;
    g.dy = ly / ny;
  } else {
    g.ny = 1;
    g.ly = 1.0;
    g.dy = 1.0;
  }
  return g;
}

std::string preset_name(InitPreset::Kind kind) {
  switch (kind) {
    case InitPreset::Kind::Zero: return "zero";
    case InitPreset::Kind::Uniform: return "uniform";
    case InitPreset::Kind::GaussBump: return "gauss-bump";
    case InitPreset::Kind::Custom: return "custom-file";
  }
  return "?";
}

InitPreset::Kind preset_kind_from_string(const std::string& name) {
  if (name == "zero") return InitPreset::Kind::Zero;
  if (name == "uniform") return InitPreset::Kind::Uniform;
  if (name == "gauss-bump") return InitPreset::Kind::GaussBump;
  if (name == "custom-file") return InitPreset::Kind::Custom;
  throw ConfigError("unknown init_preset '" + name +
                    "' (expected zero|uniform|gauss-bump|custom-file)");
}

void check_shape(const State& state, const Grid& grid) {
  const std::size_t n = grid.size();
  if (state.m.size() != n || state.c.size() != n || state.d.size() != n) {
    std::ostringstream os;
    os << "state arrays (" << state.m.size() << ", " << state.c.size() << ", "
       << state.d.size() << ") do not match grid size " << n;
    throw ShapeError(os.str());
  }
}

void fill_ghost_neumann(std::span<double> u, const Grid& grid) {
  if (u.size() != grid.size()) {
    throw ShapeError("field of size " + std::to_string(u.size()) +
                     " does not match grid size " + std::to_string(grid.size()));
  }
  constexpr int g = Grid::ghost;
  const int nx = grid.nx;
  const int j_end = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < j_end; ++j) {
    double* row = u.data() + grid.index(0, j);
    for (int k = 0; k < g; ++k) {
      row[-1 - k] = row[k];
      row[nx + k] = row[nx - 1 - k];
    }
  }
  if (grid.dim != 2) return;
  const int ny = grid.ny;
  const std::ptrdiff_t s = grid.y_stride();
  for (int i = -g; i < nx + g; ++i) {
    double* col = u.data() + grid.index(i, 0);
    for (int k = 0; k < g; ++k) {
      col[(-1 - k) * s] = col[k * s];
      col[(ny + k) * s] = col[(ny - 1 - k) * s];
    }
  }
}

void fill_ghost_neumann(State& state, const Grid& grid) {
  check_shape(state, grid);
  fill_ghost_neumann(std::span<double>(state.m), grid);
  fill_ghost_neumann(std::span<double>(state.c), grid);
  fill_ghost_neumann(std::span<double>(state.d), grid);
}

double integrate_field(std::span<const double> field, const Grid& grid) {
  if (field.size() != grid.size()) throw ShapeError("integrate_field: shape mismatch");
  const int j_end = grid.dim == 2 ? grid.ny : 1;
  double sum = 0.0;
  for (int j = 0; j < j_end; ++j) {
    const double* row = field.data() + grid.index(0, j);
    for (int i = 0; i < grid.nx; ++i) sum += row[i];
  }
  return sum * grid.cell_volume();
}

double linf_norm(std::span<const double> field, const Grid& grid) {
  if (field.size() != grid.size()) throw ShapeError("linf_norm: shape mismatch");
  const int j_end = grid.dim == 2 ? grid.ny : 1;
  double v = 0.0;
  for (int j = 0; j < j_end; ++j) {
    const double* row = field.data() + grid.index(0, j);
    for (int i = 0; i < grid.nx; ++i) v = std::max(v, std::abs(row[i]));
  }
  return v;
}

std::vector<double> interior(std::span<const double> field, const Grid& grid) {
  if (field.size() != grid.size()) throw ShapeError("interior: shape mismatch");
  std::vector<double> out;
  out.reserve(grid.interior_count());
  const int j_end = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < j_end; ++j) {
    const double* row = field.data() + grid.index(0, j);
    out.insert(out.end(), row, row + grid.nx);
  }
  return out;
}

namespace {

void check_initial_bounds(double m, double c, double d) {
  if (!(m >= 0.0) || !(c >= 0.0) || !(d >= 0.0 && d <= 1.0)) {
    std::ostringstream os;
    os << "initial data must satisfy m >= 0, c >= 0, 0 <= d <= 1 (got m=" << m
       << ", c=" << c << ", d=" << d << ")";
    throw ConfigError(os.str());
  }
}

}  // namespace

State allocate_state(const Grid& grid, const InitPreset& init) {
  State s;
  s.m.assign(grid.size(), 0.0);
  s.c.assign(grid.size(), 0.0);
  s.d.assign(grid.size(), 0.0);
  const int j_end = grid.dim == 2 ? grid.ny : 1;

  switch (init.kind) {
    case InitPreset::Kind::Zero:
      break;
    case InitPreset::Kind::Uniform:
      check_initial_bounds(init.m0, init.c0, init.d0);
      std::fill(s.m.begin(), s.m.end(), init.m0);
      std::fill(s.c.begin(), s.c.end(), init.c0);
      std::fill(s.d.begin(), s.d.end(), init.d0);
      break;
    case InitPreset::Kind::GaussBump: {
      check_initial_bounds(init.amplitude, init.c0, init.d0);
      if (!(init.sigma_fraction > 0.0)) throw ConfigError("sigma_fraction must be > 0");
      const double sigma = init.sigma_fraction * grid.lx;
      const double x0 = init.center_x * grid.lx;
      const double y0 = init.center_y * grid.ly;
      for (int j = 0; j < j_end; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
          const double rx = grid.x_center(i) - x0;
          const double ry = grid.dim == 2 ? grid.y_center(j) - y0 : 0.0;
          const std::size_t k = grid.index(i, j);
          s.m[k] = init.amplitude * std::exp(-(rx * rx + ry * ry) / (2.0 * sigma * sigma));
          s.c[k] = init.c0;
          s.d[k] = init.d0;
        }
      }
      break;
    }
    case InitPreset::Kind::Custom: {
      if (!init.custom) throw ConfigError("custom-file preset without loaded fields");
      const CustomFields& f = *init.custom;
      const std::size_t n = grid.interior_count();
      if (f.m.size() != n || f.c.size() != n || f.d.size() != n) {
        throw ShapeError("custom initial data has " + std::to_string(f.m.size()) +
                         " cells, grid expects " + std::to_string(n));
      }
      std::size_t q = 0;
      for (int j = 0; j < j_end; ++j) {
        for (int i = 0; i < grid.nx; ++i, ++q) {
          check_initial_bounds(f.m[q], f.c[q], f.d[q]);
          const std::size_t k = grid.index(i, j);
          s.m[k] = f.m[q];
          s.c[k] = f.c[q];
          s.d[k] = f.d[q];
        }
      }
      break;
    }
  }
  fill_ghost_neumann(s, grid);
  return s;
}

}  // namespace balo
