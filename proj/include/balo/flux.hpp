#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <vector>

#include "balo/grid.hpp"
#include "balo/model.hpp"

namespace balo {

/// min if all entries > 0, max if all < 0, else 0.
double minmod(std::span<const double> values);

/// Branch-free three-argument minmod: max(lo, 0) + min(hi, 0) equals lo
/// when all are positive, hi when all are negative, and 0 otherwise.
inline double minmod3(double a, double b, double c) {
  const double lo = std::min(std::min(a, b), c);
  const double hi = std::max(std::max(a, b), c);
  return std::max(lo, 0.0) + std::min(hi, 0.0);
}

/// minmod(theta (u_c - u_l)/dx, (u_r - u_l)/(2 dx), theta (u_r - u_c)/dx).
inline double limited_slope(double u_left, double u_center, double u_right, double dx,
                            double theta) {
  return minmod3(theta * (u_center - u_left) / dx, (u_right - u_left) / (2.0 * dx),
                 theta * (u_right - u_center) / dx);
}

namespace kernel {

/// limited_slope with a precomputed 1/dx.
inline double slope(double ul, double uc, double ur, double inv_h, double theta) {
  return minmod3(theta * (uc - ul) * inv_h, (ur - ul) * (0.5 * inv_h), theta * (ur - uc) * inv_h);
}

/// Face velocity from cell enthalpies and the left cell's c-slope and
/// saturation factor 1/(1 + delta m_L).
inline double velocity(double H_left, double H_right, double inv_h, double chi,
                       double c_slope_left, double sensitivity_left) {
  return -(H_right - H_left) * inv_h + chi * c_slope_left * sensitivity_left;
}

}  // namespace kernel

/// Fills per-cell H(m) and 1/(1 + delta m) over the whole ghosted array.
void prepare_cell_terms(const State& state, const ModelParams& params,
                        std::vector<double>& enthalpy, std::vector<double>& sensitivity);

/// Interface velocity between a left and right cell:
/// -(H(m_R) - H(m_L))/dx + chi * c_slope_left * f(m_L)/m_L.
double velocity_m(double m_left, double m_right, double c_slope_left, double dx,
                  const ModelParams& p);

/// Upwind macrophage flux from the limited left/right reconstructions,
/// clamped at zero.
inline double flux_m(double theta_vel, double m_left, double m_right, double slope_left,
                     double slope_right, double dx) {
  const double east_of_left = std::max(0.0, m_left + 0.5 * dx * slope_left);
  const double west_of_right = std::max(0.0, m_right - 0.5 * dx * slope_right);
  return std::max(theta_vel, 0.0) * east_of_left + std::min(theta_vel, 0.0) * west_of_right;
}

/// Central cytokine diffusion flux -alpha (c_R - c_L)/dx.
double flux_c(double c_left, double c_right, double dx, const ModelParams& p);

/// Face-centred quantities for one sweep direction.  Line l holds faces
/// [l*(n+1), (l+1)*(n+1)); face k of a line separates cells k-1 and k, so
/// faces 0 and n are boundary faces.
struct DirectionalFluxes {
  int lines = 0;
  int cells_per_line = 0;
  std::vector<double> f_m;
  std::vector<double> f_c;
  std::vector<double> velocity;

  int faces_per_line() const { return cells_per_line + 1; }
  std::size_t face(int line, int k) const {
    return static_cast<std::size_t>(line) * static_cast<std::size_t>(faces_per_line()) +
           static_cast<std::size_t>(k);
  }
};

/// Output of one flux sweep.  Index 0 is x, 1 is y (unused in 1D).  Slopes
/// are stored per cell in grid storage order.
struct FluxSet {
  double theta = 1.5;
  std::array<DirectionalFluxes, 2> dir;
  std::array<std::vector<double>, 2> s_m;
  std::array<std::vector<double>, 2> s_c;
  double max_abs_velocity = 0.0;
  /// Per-cell H(m) and 1/(1 + delta m); scratch reused across sweeps.
  std::vector<double> enthalpy;
  std::vector<double> sensitivity;
};

/// Refills ghosts of `state`, then computes slopes, velocities and fluxes
/// on every face.  Boundary-face fluxes are exactly zero.  Throws
/// NumericalError naming the face on any non-finite value.
void compute_fluxes(State& state, const Grid& grid, const ModelParams& params, double theta,
                    FluxSet& out);

FluxSet compute_fluxes(State state, const Grid& grid, const ModelParams& params,
                       double theta);

}  // namespace balo
