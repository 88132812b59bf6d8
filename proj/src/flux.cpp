#include "balo/flux.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "balo/errors.hpp"
#include "balo/vector_log.hpp"

namespace balo {

double minmod(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const bool all_pos = std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; });
  if (all_pos) return *std::min_element(values.begin(), values.end());
  const bool all_neg = std::all_of(values.begin(), values.end(), [](double v) { return v < 0.0; });
  if (all_neg) return *std::max_element(values.begin(), values.end());
  return 0.0;
}

double velocity_m(double m_left, double m_right, double c_slope_left, double dx,
                  const ModelParams& p) {
  return -(diffusion_enthalpy(m_right, p) - diffusion_enthalpy(m_left, p)) / dx +
         p.chi * c_slope_left * chemo_sensitivity(m_left, p);
}

double flux_c(double c_left, double c_right, double dx, const ModelParams& p) {
  return -p.alpha * (c_right - c_left) / dx;
}

void prepare_cell_terms(const State& state, const ModelParams& params,
                        std::vector<double>& H, std::vector<double>& sens) {
  const std::size_t n = state.m.size();
  H.resize(n);
  sens.resize(n);
  const double* m = state.m.data();
  const double delta = params.delta;
  double* __restrict h = H.data();
  double* __restrict sn = sens.data();
  for (std::size_t q = 0; q < n; ++q) sn[q] = unchecked::chemo_sensitivity(m[q], delta);
  // Sign bits flag negative densities (and -0.0, which the rescan accepts).
  std::uint64_t sign_bits = 0;
  for (std::size_t q = 0; q < n; ++q) sign_bits |= std::bit_cast<std::uint64_t>(m[q]);
  if (sign_bits >> 63) [[unlikely]] {
    for (std::size_t q = 0; q < n; ++q) diffusion_enthalpy(m[q], params);  // throws on m < 0
  }
  if (params.diffusion_mode == DiffusionMode::PorousMedium && params.gamma == 2.0) {
    const double eps = params.epsilon;
    for (std::size_t q = 0; q < n; ++q) h[q] = 2.0 * (m[q] + eps);
  } else if (params.diffusion_mode == DiffusionMode::Linear) {
    detail::log_shifted(m, h, n, params.epsilon + params.eta_floor);
  } else {
    for (std::size_t q = 0; q < n; ++q) h[q] = diffusion_enthalpy(m[q], params);
  }
}

namespace {

// Zero-fills only on a shape change; every live entry is rewritten per sweep.
void ensure_size(std::vector<double>& v, std::size_t n) {
  if (v.size() != n) v.assign(n, 0.0);
}

void resize_direction(DirectionalFluxes& f, int lines, int cells) {
  f.lines = lines;
  f.cells_per_line = cells;
  const std::size_t n = static_cast<std::size_t>(lines) * static_cast<std::size_t>(cells + 1);
  ensure_size(f.f_m, n);
  ensure_size(f.f_c, n);
  ensure_size(f.velocity, n);
}

[[noreturn]] void report_non_finite(const char* field, int axis, int line, int k,
                                    double value) {
  std::ostringstream os;
  os << "non-finite " << field << " (" << value << ") at " << (axis == 0 ? "x" : "y")
     << "-face " << k << " of line " << line << " (between cells " << k - 1 << " and " << k
     << ")";
  throw NumericalError(os.str());
}

// One directional sweep along lines of `n` cells separated by `stride` in
// storage; `line_start(l)` gives the storage index of cell 0 on line l.
template <class LineStart>
double sweep(int axis, int lines, int n, std::ptrdiff_t stride, double h, LineStart line_start,
             const State& st, const ModelParams& p, double theta, FluxSet& out) {
  DirectionalFluxes& f = out.dir[axis];
  std::vector<double>& sm = out.s_m[axis];
  std::vector<double>& sc = out.s_c[axis];
  const std::vector<double>& H = out.enthalpy;
  const std::vector<double>& sens = out.sensitivity;
  const double* m = st.m.data();
  const double* c = st.c.data();
  double vmax = 0.0;
  const double inv_h = 1.0 / h;
  auto slope = [&](double ul, double uc, double ur) {
    return kernel::slope(ul, uc, ur, inv_h, theta);
  };

  for (int l = 0; l < lines; ++l) {
    const std::size_t base = line_start(l);
    for (int i = 0; i < n; ++i) {
      const std::size_t q = base + static_cast<std::size_t>(i * stride);
      sm[q] = slope(m[q - stride], m[q], m[q + stride]);
      sc[q] = slope(c[q - stride], c[q], c[q + stride]);
    }
    const std::size_t f0 = f.face(l, 0);
    f.f_m[f0] = f.f_c[f0] = f.velocity[f0] = 0.0;
    f.f_m[f0 + n] = f.f_c[f0 + n] = f.velocity[f0 + n] = 0.0;
    for (int k = 1; k < n; ++k) {
      const std::size_t ql = base + static_cast<std::size_t>((k - 1) * stride);
      const std::size_t qr = ql + stride;
      const double vel = kernel::velocity(H[ql], H[qr], inv_h, p.chi, sc[ql], sens[ql]);
      const double fm = flux_m(vel, m[ql], m[qr], sm[ql], sm[qr], h);
      const double fc = -p.alpha * (c[qr] - c[ql]) * inv_h;
      if (!std::isfinite(fm) || !std::isfinite(fc)) {
        if (!std::isfinite(vel)) report_non_finite("velocity", axis, l, k, vel);
        if (!std::isfinite(fm)) report_non_finite("m-flux", axis, l, k, fm);
        report_non_finite("c-flux", axis, l, k, fc);
      }
      f.velocity[f0 + k] = vel;
      f.f_m[f0 + k] = fm;
      f.f_c[f0 + k] = fc;
      vmax = std::max(vmax, std::abs(vel));
    }
  }
  return vmax;
}

}  // namespace

void compute_fluxes(State& state, const Grid& grid, const ModelParams& params, double theta,
                    FluxSet& out) {
  fill_ghost_neumann(state, grid);
  out.theta = theta;
  const std::size_t n = grid.size();
  prepare_cell_terms(state, params, out.enthalpy, out.sensitivity);

  const int axes = grid.dim;
  for (int a = 0; a < axes; ++a) {
    ensure_size(out.s_m[a], n);
    ensure_size(out.s_c[a], n);
  }
  const int rows = grid.dim == 2 ? grid.ny : 1;
  resize_direction(out.dir[0], rows, grid.nx);
  double vmax = sweep(
      0, rows, grid.nx, 1, grid.dx, [&](int l) { return grid.index(0, l); }, state, params,
      theta, out);
  if (grid.dim == 2) {
    resize_direction(out.dir[1], grid.nx, grid.ny);
    vmax = std::max(vmax, sweep(
                              1, grid.nx, grid.ny, grid.y_stride(), grid.dy,
                              [&](int l) { return grid.index(l, 0); }, state, params, theta,
                              out));
  } else {
    out.dir[1] = DirectionalFluxes{};
    out.s_m[1].clear();
    out.s_c[1].clear();
  }
  out.max_abs_velocity = vmax;
}

FluxSet compute_fluxes(State state, const Grid& grid, const ModelParams& params, double theta) {
  FluxSet out;
  compute_fluxes(state, grid, params, theta, out);
  return out;
}

}  // namespace balo
