#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace balo {

/// Uniform cell-centred mesh on [0, lx] (x [0, ly]) with a two-cell ghost
/// frame.  Storage is row-major with j outer; in 1D there is a single row
/// and no ghost rows.
struct Grid {
  static constexpr int ghost = 2;

  int dim = 1;
  int nx = 0;
  int ny = 1;
  double lx = 1.0;
  double ly = 1.0;
  double dx = 0.0;
  double dy = 1.0;

  /// Validating constructor: nx >= 4 (and ny >= 4 in 2D), positive extents.
  static Grid make(int dim, int nx, double lx, int ny = 1, double ly = 1.0);

  int row_size() const { return nx + 2 * ghost; }
  int rows() const { return dim == 2 ? ny + 2 * ghost : 1; }
  std::size_t size() const {
    return static_cast<std::size_t>(row_size()) * static_cast<std::size_t>(rows());
  }
  std::size_t interior_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(dim == 2 ? ny : 1);
  }
  /// Storage index of cell (i, j); interior indices are [0, nx) x [0, ny),
  /// ghosts extend two cells beyond.  j is ignored in 1D.
  std::size_t index(int i, int j = 0) const {
    const int jj = dim == 2 ? j + ghost : 0;
    return static_cast<std::size_t>(jj) * static_cast<std::size_t>(row_size()) +
           static_cast<std::size_t>(i + ghost);
  }
  /// Offset between vertically adjacent cells.
  std::ptrdiff_t y_stride() const { return row_size(); }

  double x_center(int i) const { return (i + 0.5) * dx; }
  double y_center(int j) const { return dim == 2 ? (j + 0.5) * dy : 0.0; }
  double cell_volume() const { return dim == 2 ? dx * dy : dx; }
  double domain_measure() const { return dim == 2 ? lx * ly : lx; }
};

/// Cell averages of (m, c, d) at time t, ghost frame included.
struct State {
  std::vector<double> m;
  std::vector<double> c;
  std::vector<double> d;
  double t = 0.0;
};

/// Interior field values supplied directly (custom initial data).
struct CustomFields {
  std::vector<double> m;  ///< interior only, row-major
  std::vector<double> c;
  std::vector<double> d;
};

struct InitPreset {
  enum class Kind { Zero, Uniform, GaussBump, Custom };
  Kind kind = Kind::GaussBump;
  double amplitude = 1.0;
  /// Gaussian width as a fraction of lx.
  double sigma_fraction = 0.05;
  /// Bump centre as fractions of (lx, ly).
  double center_x = 0.5;
  double center_y = 0.5;
  /// Uniform preset values; for GaussBump, the constant backgrounds of c, d.
  double m0 = 0.0;
  double c0 = 0.0;
  double d0 = 0.0;
  std::optional<CustomFields> custom;
};

std::string preset_name(InitPreset::Kind kind);
InitPreset::Kind preset_kind_from_string(const std::string& name);

/// Throws ShapeError unless all three arrays match the grid.
void check_shape(const State& state, const Grid& grid);

/// Homogeneous Neumann mirror: ghost layer k copies interior cell k counted
/// from the same boundary.  x pass on interior rows, then y pass on every
/// column (corners receive the diagonal mirror).
void fill_ghost_neumann(std::span<double> field, const Grid& grid);
void fill_ghost_neumann(State& state, const Grid& grid);

/// Sum over interior cells of field * cell volume.
double integrate_field(std::span<const double> field, const Grid& grid);

/// max |field| over interior cells.
double linf_norm(std::span<const double> field, const Grid& grid);

/// Initial data from a preset, ghosts filled.  Rejects m0 < 0 or d0
/// outside [0, 1].
State allocate_state(const Grid& grid, const InitPreset& init);

/// Copies the interior of `field` into a dense row-major vector.
std::vector<double> interior(std::span<const double> field, const Grid& grid);

}  // namespace balo
