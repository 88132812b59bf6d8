#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "balo/flux.hpp"
#include "balo/grid.hpp"
#include "balo/model.hpp"

namespace balo {

struct StateDerivative {
  std::vector<double> m;
  std::vector<double> c;
  std::vector<double> d;
};

/// Stage-wise projection activity.  Nonzero counts mean the scheme left
/// the invariant region before the projection restored it.
struct ClampCounts {
  std::size_t m_negative = 0;
  std::size_t d_below = 0;
  std::size_t d_above = 0;
  double m_magnitude = 0.0;  ///< sum of |m| removed
  double d_magnitude = 0.0;

  std::size_t total() const { return m_negative + d_below + d_above; }
  ClampCounts& operator+=(const ClampCounts& o);
};

struct StepStats {
  double t = 0.0;
  double dt = 0.0;
  double max_abs_velocity = 0.0;
  double min_m = 0.0;
  double max_m = 0.0;
  double mass_m = 0.0;
  double linf_c = 0.0;
  double max_d = 0.0;
  double min_c = 0.0;
  double min_d = 0.0;
  ClampCounts clamps;
};

/// Per-cell terms reused across rhs calls, plus the largest face speed
/// seen on each axis during the last call.
struct LineScratch {
  std::vector<double> s_m, s_c, f_m, f_c, velocity;
  void resize(int n) {
    const auto cells = static_cast<std::size_t>(n);
    if (s_m.size() < cells) {
      s_m.resize(cells);
      s_c.resize(cells);
    }
    if (f_m.size() < cells + 1) {
      f_m.resize(cells + 1);
      f_c.resize(cells + 1);
      velocity.resize(cells + 1);
    }
  }
};

struct ColumnScratch {
  std::vector<double> m, c, H, sens, dm, dc;
};

struct RhsScratch {
  std::vector<double> enthalpy;
  std::vector<double> sensitivity;
  LineScratch line;
  ColumnScratch column;
  std::array<double, 2> max_abs_velocity{0.0, 0.0};
};

/// Semi-discrete right-hand side
///   dm/dt = -div_h F^m + mu m (1 - m)
///   dc/dt = (-div_h F^c + lambda d - c + beta m) / tau
///   dd/dt = r m f(m) (1 - d)
/// with the same face formulas as compute_fluxes, fused into one sweep per
/// axis.  Refills ghosts of `state`.  Throws NumericalError naming the cell
/// on non-finite output.
void rhs(State& state, const Grid& grid, const ModelParams& params, double theta,
         StateDerivative& out, RhsScratch& scratch);
StateDerivative rhs(State state, const Grid& grid, const ModelParams& params, double theta);

/// Scratch storage for ssp_rk3_step.
struct RkWorkspace {
  State u1;
  State u2;
  StateDerivative k;
};

/// Projects m onto [0, inf) and d onto [0, 1], counting activity.
void clamp_state(State& u, ClampCounts& counts);

namespace detail {
inline void clamp_m(double& v, ClampCounts& c) {
  if (v < 0.0) [[unlikely]] {
    ++c.m_negative;
    c.m_magnitude -= v;
    v = 0.0;
  }
}
inline void clamp_d(double& v, ClampCounts& c) {
  if (v < 0.0) [[unlikely]] {
    ++c.d_below;
    c.d_magnitude -= v;
    v = 0.0;
  } else if (v > 1.0) [[unlikely]] {
    ++c.d_above;
    c.d_magnitude += v - 1.0;
    v = 1.0;
  }
}

// Sign bits of m, d and 1 - d OR-ed together: a clear top bit proves the
// stage stayed inside the invariant region.  Integer ops keep the loop
// vectorizable; -0.0 and d == 1 only cost a redundant scalar pass.
inline std::uint64_t region_bits(double m, double d) {
  return std::bit_cast<std::uint64_t>(m) | std::bit_cast<std::uint64_t>(d) |
         std::bit_cast<std::uint64_t>(1.0 - d);
}
constexpr std::uint64_t kSignBit = std::uint64_t{1} << 63;

inline void clamp_pass(double* m, double* d, std::size_t n, ClampCounts& c) {
  for (std::size_t q = 0; q < n; ++q) {
    clamp_m(m[q], c);
    clamp_d(d[q], c);
  }
}

// out = a*u + b*(w + dt*k) on all three fields.  Returns the OR of
// region_bits over the written values.  Arrays must not overlap.
std::uint64_t rk_combine(std::size_t n, double a, double b, double dt,
                         const double* __restrict um, const double* __restrict uc,
                         const double* __restrict ud, const double* __restrict wm,
                         const double* __restrict wc, const double* __restrict wd,
                         const double* __restrict km, const double* __restrict kc,
                         const double* __restrict kd, double* __restrict om,
                         double* __restrict oc, double* __restrict od);

inline void rk_stage(double a, const State& u, double b, const State& w, double dt,
                     const StateDerivative& k, State& out, ClampCounts& clamps) {
  const std::size_t n = u.m.size();
  const std::uint64_t bits =
      rk_combine(n, a, b, dt, u.m.data(), u.c.data(), u.d.data(), w.m.data(), w.c.data(),
                 w.d.data(), k.m.data(), k.c.data(), k.d.data(), out.m.data(), out.c.data(),
                 out.d.data());
  if (bits & kSignBit) [[unlikely]] clamp_pass(out.m.data(), out.d.data(), n, clamps);
}
}  // namespace detail

/// Shu-Osher SSP-RK3:
///   u1 = u + dt L(u)
///   u2 = 3/4 u + 1/4 (u1 + dt L(u1))
///   u  = 1/3 u + 2/3 (u2 + dt L(u2))
/// with clamp_state after each stage.  `rhs_fn(State&, StateDerivative&)`
/// evaluates L.  When `first_stage_ready` is set, ws.k already holds L(u).
template <class RhsFn>
void ssp_rk3_step(State& u, double dt, RhsFn&& rhs_fn, RkWorkspace& ws, ClampCounts& clamps,
                  bool first_stage_ready = false) {
  const std::size_t n = u.m.size();
  auto& k = ws.k;
  if (!first_stage_ready) rhs_fn(u, k);

  for (auto* v : {&ws.u1.m, &ws.u1.c, &ws.u1.d, &ws.u2.m, &ws.u2.c, &ws.u2.d}) v->resize(n);
  ws.u1.t = u.t + dt;
  ws.u2.t = u.t + 0.5 * dt;

  detail::rk_stage(0.0, u, 1.0, u, dt, k, ws.u1, clamps);
  rhs_fn(ws.u1, k);
  detail::rk_stage(0.75, u, 0.25, ws.u1, dt, k, ws.u2, clamps);
  rhs_fn(ws.u2, k);
  // u1 is dead by now; build the result there and swap it in.
  detail::rk_stage(1.0 / 3.0, u, 2.0 / 3.0, ws.u2, dt, k, ws.u1, clamps);
  std::swap(u.m, ws.u1.m);
  std::swap(u.c, ws.u1.c);
  std::swap(u.d, ws.u1.d);
  u.t += dt;
}

/// Value-returning convenience wrapper.
template <class RhsFn>
State ssp_rk3_step(State u, double dt, RhsFn&& rhs_fn, ClampCounts* clamps = nullptr) {
  RkWorkspace ws;
  ClampCounts local;
  ssp_rk3_step(u, dt, rhs_fn, ws, local);
  if (clamps) *clamps += local;
  return u;
}

/// Guard added to the advective denominator.
inline constexpr double kDtTiny = 1e-300;
/// Steps below this signal velocity blow-up.
inline constexpr double kMinDt = 1e-14;

/// cfl * min over axes of min(h/(2 max|v| + tiny), h^2/(2 (alpha/tau + max D_eps(m)))).
/// Throws NumericalError when the result is below kMinDt.
double stable_dt(State& state, const Grid& grid, const ModelParams& params, double cfl,
                 double theta = 1.5);

/// Same bound from already known per-axis face speeds.
double stable_dt_from_speeds(const State& state, const std::array<double, 2>& max_abs_velocity,
                             const Grid& grid, const ModelParams& params, double cfl);

struct AdvanceOptions {
  double cfl = 0.25;
  double theta = 1.5;
  /// Constant step (final step shortened); CFL is ignored when set.
  std::optional<double> fixed_dt;
  /// Instants hit exactly; each triggers on_snapshot.
  std::vector<double> snapshot_times;
  /// Keep every k-th StepStats (the final step is always kept); 0 keeps none.
  std::size_t stats_stride = 1;
  std::function<void(const State&, std::size_t snapshot_index)> on_snapshot;
  std::function<void(const State&, const StepStats&)> on_step;
};

/// Extremes over every accepted step, initial state included.
struct RunSummary {
  std::size_t steps = 0;
  double min_m = 0.0;
  double max_m = 0.0;
  double min_c = 0.0;
  double max_linf_c = 0.0;
  double min_d = 0.0;
  double max_d = 0.0;
  double mass0 = 0.0;
  double max_mass = 0.0;
  double max_abs_mass_drift = 0.0;
  double max_abs_velocity = 0.0;
  double min_dt = 0.0;
  ClampCounts clamps;
};

struct AdvanceResult {
  State state;
  std::vector<StepStats> stats;
  RunSummary summary;
};

/// Interior statistics of `state` (velocity, dt and clamps left zero).
StepStats measure(const State& state, const Grid& grid);

/// Integrates from state.t to t_end; the returned state sits at t_end
/// exactly.  Snapshots already emitted stay emitted if a later step throws.
AdvanceResult advance_to(State state, double t_end, const Grid& grid, const ModelParams& params,
                         const AdvanceOptions& options);

}  // namespace balo
