#include "balo/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "balo/errors.hpp"

namespace balo {

ClampCounts& ClampCounts::operator+=(const ClampCounts& o) {
  m_negative += o.m_negative;
  d_below += o.d_below;
  d_above += o.d_above;
  m_magnitude += o.m_magnitude;
  d_magnitude += o.d_magnitude;
  return *this;
}

namespace {

[[noreturn]] void report_bad_derivative(const Grid& grid, std::size_t q, const char* field,
                                        double value) {
  const int row = grid.row_size();
  const int i = static_cast<int>(q % row) - Grid::ghost;
  const int j = grid.dim == 2 ? static_cast<int>(q / row) - Grid::ghost : 0;
  std::ostringstream os;
  os << "non-finite d" << field << "/dt (" << value << ") at cell (" << i << ", " << j << ")";
  throw NumericalError(os.str());
}

}  // namespace

namespace detail {

std::uint64_t rk_combine(std::size_t n, double a, double b, double dt,
                         const double* __restrict um, const double* __restrict uc,
                         const double* __restrict ud, const double* __restrict wm,
                         const double* __restrict wc, const double* __restrict wd,
                         const double* __restrict km, const double* __restrict kc,
                         const double* __restrict kd, double* __restrict om,
                         double* __restrict oc, double* __restrict od) {
  std::uint64_t bits = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double m = a * um[q] + b * (wm[q] + dt * km[q]);
    const double d = a * ud[q] + b * (wd[q] + dt * kd[q]);
    oc[q] = a * uc[q] + b * (wc[q] + dt * kc[q]);
    om[q] = m;
    od[q] = d;
    bits |= region_bits(m, d);
  }
  return bits;
}

}  // namespace detail

namespace {

constexpr std::uint64_t kExponentBits = 0x7ff0000000000000ULL;

struct ReactionCoefficients {
  double mu, lambda, beta, tau, r, inv_tau, d_cap;
};

// Adds the reaction terms on one row (dc is rescaled by 1/tau first).
// Sign bits of m and d_cap - d, and the exponent bits of 0 * derivative
// (NaN unless finite), are OR-ed into the flags.  Kept out of line so the
// restrict qualifiers survive and the loop vectorizes.
[[gnu::noinline]] void reaction_row(int n, const ReactionCoefficients& k,
                                    const double* __restrict m, const double* __restrict c,
                                    const double* __restrict d, const double* __restrict sn,
                                    double* __restrict dm, double* __restrict dc,
                                    double* __restrict dd, std::uint64_t& sign_flags,
                                    std::uint64_t& nan_flags) {
  std::uint64_t sign_bits = 0;
  std::uint64_t nan_bits = 0;
  const double mu = k.mu, lambda = k.lambda, beta = k.beta, tau = k.tau, r = k.r;
  const double inv_tau = k.inv_tau, d_cap = k.d_cap;
  for (int i = 0; i < n; ++i) {
    sign_bits |= std::bit_cast<std::uint64_t>(m[i]) | std::bit_cast<std::uint64_t>(d_cap - d[i]);
    const double vm = dm[i] + unchecked::reaction_m(m[i], mu);
    const double vc = dc[i] * inv_tau + unchecked::reaction_c(m[i], c[i], d[i], lambda, beta, tau);
    const double vd = unchecked::damage_rate(m[i], d[i], r, sn[i]);
    dm[i] = vm;
    dc[i] = vc;
    dd[i] = vd;
    nan_bits |= std::bit_cast<std::uint64_t>(0.0 * vm) | std::bit_cast<std::uint64_t>(0.0 * vc) |
                std::bit_cast<std::uint64_t>(0.0 * vd);
  }
  sign_flags |= sign_bits;
  nan_flags |= nan_bits;
}

// Transport divergence on one contiguous line of n cells.  Inputs point at
// interior cell 0 and are valid on [-2, n + 2).  Boundary faces carry zero
// flux.  Writes (Accumulate = false) or adds the divergence into dm/dc and
// returns max |velocity| over interior faces.
template <bool Accumulate>
double transport_line(const double* __restrict m, const double* __restrict c,
                      const double* __restrict H, const double* __restrict sens, int n, double h,
                      double theta, double chi, double alpha, LineScratch& ls,
                      double* __restrict dm, double* __restrict dc) {
  const double inv_h = 1.0 / h;
  ls.resize(n);
  double* __restrict sm = ls.s_m.data();
  double* __restrict sc = ls.s_c.data();
  double* __restrict fm = ls.f_m.data();
  double* __restrict fc = ls.f_c.data();
  double* __restrict vel = ls.velocity.data();

  for (int i = 0; i < n; ++i) {
    sm[i] = kernel::slope(m[i - 1], m[i], m[i + 1], inv_h, theta);
    sc[i] = kernel::slope(c[i - 1], c[i], c[i + 1], inv_h, theta);
  }
  fm[0] = fc[0] = vel[0] = 0.0;
  fm[n] = fc[n] = vel[n] = 0.0;
  for (int k = 1; k < n; ++k) {
    const double v = kernel::velocity(H[k - 1], H[k], inv_h, chi, sc[k - 1], sens[k - 1]);
    vel[k] = v;
    fm[k] = flux_m(v, m[k - 1], m[k], sm[k - 1], sm[k], h);
    fc[k] = -alpha * (c[k] - c[k - 1]) * inv_h;
  }
  for (int i = 0; i < n; ++i) {
    const double div_m = -(fm[i + 1] - fm[i]) * inv_h;
    const double div_c = -(fc[i + 1] - fc[i]) * inv_h;
    if constexpr (Accumulate) {
      dm[i] += div_m;
      dc[i] += div_c;
    } else {
      dm[i] = div_m;
      dc[i] = div_c;
    }
  }
  // Four independent accumulators keep the reduction off the latency chain.
  double v0 = 0.0, v1 = 0.0, v2 = 0.0, v3 = 0.0;
  int k = 0;
  for (; k + 3 <= n; k += 4) {
    v0 = std::max(v0, std::abs(vel[k]));
    v1 = std::max(v1, std::abs(vel[k + 1]));
    v2 = std::max(v2, std::abs(vel[k + 2]));
    v3 = std::max(v3, std::abs(vel[k + 3]));
  }
  for (; k <= n; ++k) v0 = std::max(v0, std::abs(vel[k]));
  return std::max(std::max(v0, v1), std::max(v2, v3));
}

}  // namespace

void rhs(State& state, const Grid& grid, const ModelParams& p, double theta,
         StateDerivative& out, RhsScratch& scratch) {
  fill_ghost_neumann(state, grid);
  const std::size_t n = grid.size();
  // Ghost entries stay zero; every interior entry is overwritten below.
  for (auto* v : {&out.m, &out.c, &out.d}) {
    if (v->size() != n) v->assign(n, 0.0);
  }
  prepare_cell_terms(state, p, scratch.enthalpy, scratch.sensitivity);
  const double* H = scratch.enthalpy.data();
  const double* sens = scratch.sensitivity.data();

  const int rows = grid.dim == 2 ? grid.ny : 1;
  double vx = 0.0;
  for (int j = 0; j < rows; ++j) {
    const std::size_t q0 = grid.index(0, j);
    vx = std::max(vx, transport_line<false>(state.m.data() + q0, state.c.data() + q0, H + q0,
                                            sens + q0, grid.nx, grid.dx, theta, p.chi, p.alpha,
                                            scratch.line, out.m.data() + q0,
                                            out.c.data() + q0));
  }
  double vy = 0.0;
  if (grid.dim == 2) {
    // Columns are gathered into contiguous buffers (ghosts included).
    constexpr int g = Grid::ghost;
    const int len = grid.ny + 2 * g;
    auto& col = scratch.column;
    for (auto* v : {&col.m, &col.c, &col.H, &col.sens}) v->resize(len);
    col.dm.assign(grid.ny, 0.0);
    col.dc.assign(grid.ny, 0.0);
    const std::ptrdiff_t s = grid.y_stride();
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t top = grid.index(i, -g);
      for (int r = 0; r < len; ++r) {
        const std::size_t q = top + static_cast<std::size_t>(r * s);
        col.m[r] = state.m[q];
        col.c[r] = state.c[q];
        col.H[r] = H[q];
        col.sens[r] = sens[q];
      }
      vy = std::max(vy, transport_line<false>(col.m.data() + g, col.c.data() + g,
                                              col.H.data() + g, col.sens.data() + g, grid.ny,
                                              grid.dy, theta, p.chi, p.alpha, scratch.line,
                                              col.dm.data(), col.dc.data()));
      const std::size_t first = grid.index(i, 0);
      for (int r = 0; r < grid.ny; ++r) {
        const std::size_t q = first + static_cast<std::size_t>(r * s);
        out.m[q] += col.dm[r];
        out.c[q] += col.dc[r];
      }
    }
  }
  scratch.max_abs_velocity = {vx, vy};

  if (p.tau == 0.0) reaction_c(0.0, 0.0, 0.0, p);  // throws
  const double d_cap = 1.0 + detail::kDamageTolerance;
  std::uint64_t sign_bits = 0;
  std::uint64_t nan_bits = 0;
  const ReactionCoefficients rc{p.mu, p.lambda, p.beta, p.tau, p.r, 1.0 / p.tau, d_cap};
  for (int j = 0; j < rows; ++j) {
    const std::size_t base = grid.index(0, j);
    reaction_row(grid.nx, rc, state.m.data() + base, state.c.data() + base,
                 state.d.data() + base, sens + base, out.m.data() + base, out.c.data() + base,
                 out.d.data() + base, sign_bits, nan_bits);
  }
  if (sign_bits & detail::kSignBit) [[unlikely]] {
    // Re-evaluate through the checked forms to raise the precise error.
    for (std::size_t q = 0; q < n; ++q) damage_rate(state.m[q], state.d[q], p);
  }
  if (nan_bits & kExponentBits) [[unlikely]] {
    for (std::size_t q = 0; q < n; ++q) {
      if (!std::isfinite(out.m[q])) report_bad_derivative(grid, q, "m", out.m[q]);
      if (!std::isfinite(out.c[q])) report_bad_derivative(grid, q, "c", out.c[q]);
      if (!std::isfinite(out.d[q])) report_bad_derivative(grid, q, "d", out.d[q]);
    }
    throw NumericalError("non-finite derivative");
  }
}

StateDerivative rhs(State state, const Grid& grid, const ModelParams& params, double theta) {
  StateDerivative out;
  RhsScratch scratch;
  rhs(state, grid, params, theta, out, scratch);
  return out;
}

void clamp_state(State& u, ClampCounts& counts) {
  for (double& v : u.m) {
    if (v < 0.0) {
      ++counts.m_negative;
      counts.m_magnitude += -v;
      v = 0.0;
    }
  }
  for (double& v : u.d) {
    if (v < 0.0) {
      ++counts.d_below;
      counts.d_magnitude += -v;
      v = 0.0;
    } else if (v > 1.0) {
      ++counts.d_above;
      counts.d_magnitude += v - 1.0;
      v = 1.0;
    }
  }
}

double stable_dt_from_speeds(const State& state, const std::array<double, 2>& speed,
                             const Grid& grid, const ModelParams& p, double cfl) {
  double m_lo = std::numeric_limits<double>::infinity();
  double m_hi = 0.0;
  const int rows = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < rows; ++j) {
    const double* row = state.m.data() + grid.index(0, j);
    for (int i = 0; i < grid.nx; ++i) {
      m_lo = std::min(m_lo, row[i]);
      m_hi = std::max(m_hi, row[i]);
    }
  }
  const double d_max = std::max(diffusivity(m_lo, p), diffusivity(m_hi, p));
  const double diff_coef = p.alpha / p.tau + d_max;

  double dt = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.dim; ++a) {
    const double h = a == 0 ? grid.dx : grid.dy;
    dt = std::min(dt, h / (2.0 * speed[a] + kDtTiny));
    dt = std::min(dt, h * h / (2.0 * diff_coef));
  }
  dt *= cfl;
  if (!(dt >= kMinDt)) {
    std::ostringstream os;
    os << "time step collapsed to " << dt << " (max |velocity| = "
       << std::max(speed[0], speed[1]) << ")";
    throw NumericalError(os.str());
  }
  return dt;
}

double stable_dt(State& state, const Grid& grid, const ModelParams& params, double cfl,
                 double theta) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  FluxSet fx;
  compute_fluxes(state, grid, params, theta, fx);
  std::array<double, 2> speed{0.0, 0.0};
  for (int a = 0; a < grid.dim; ++a) {
    for (double v : fx.dir[a].velocity) speed[a] = std::max(speed[a], std::abs(v));
  }
  return stable_dt_from_speeds(state, speed, grid, params, cfl);
}

StepStats measure(const State& state, const Grid& grid) {
  StepStats s;
  s.t = state.t;
  s.min_m = std::numeric_limits<double>::infinity();
  s.max_m = -std::numeric_limits<double>::infinity();
  s.min_c = std::numeric_limits<double>::infinity();
  s.min_d = std::numeric_limits<double>::infinity();
  s.max_d = -std::numeric_limits<double>::infinity();
  double mass = 0.0;
  const int rows = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < rows; ++j) {
    const std::size_t base = grid.index(0, j);
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t q = base + i;
      const double m = state.m[q];
      s.min_m = std::min(s.min_m, m);
      s.max_m = std::max(s.max_m, m);
      mass += m;
      s.min_c = std::min(s.min_c, state.c[q]);
      s.linf_c = std::max(s.linf_c, std::abs(state.c[q]));
      s.min_d = std::min(s.min_d, state.d[q]);
      s.max_d = std::max(s.max_d, state.d[q]);
    }
  }
  s.mass_m = mass * grid.cell_volume();
  return s;
}

namespace {

void absorb(RunSummary& sum, const StepStats& s) {
  sum.min_m = std::min(sum.min_m, s.min_m);
  sum.max_m = std::max(sum.max_m, s.max_m);
  sum.min_c = std::min(sum.min_c, s.min_c);
  sum.max_linf_c = std::max(sum.max_linf_c, s.linf_c);
  sum.min_d = std::min(sum.min_d, s.min_d);
  sum.max_d = std::max(sum.max_d, s.max_d);
  sum.max_mass = std::max(sum.max_mass, s.mass_m);
  sum.max_abs_mass_drift = std::max(sum.max_abs_mass_drift, std::abs(s.mass_m - sum.mass0));
}

}  // namespace

AdvanceResult advance_to(State state, double t_end, const Grid& grid, const ModelParams& params,
                         const AdvanceOptions& opt) {
  check_shape(state, grid);
  if (!(t_end >= state.t)) throw ConfigError("t_end precedes the current time");
  if (opt.fixed_dt && !(*opt.fixed_dt > 0.0)) throw ConfigError("fixed_dt must be > 0");
  if (!opt.fixed_dt && !(opt.cfl > 0.0 && opt.cfl <= 1.0)) {
    throw ConfigError("cfl must lie in (0, 1]");
  }

  std::vector<double> targets;
  for (double ts : opt.snapshot_times) {
    if (ts >= state.t && ts <= t_end) targets.push_back(ts);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  AdvanceResult result;
  fill_ghost_neumann(state, grid);
  const StepStats s0 = measure(state, grid);
  RunSummary& sum = result.summary;
  sum.mass0 = s0.mass_m;
  sum.min_m = sum.max_m = s0.min_m;
  sum.max_m = s0.max_m;
  sum.min_c = s0.min_c;
  sum.max_linf_c = s0.linf_c;
  sum.min_d = s0.min_d;
  sum.max_d = s0.max_d;
  sum.max_mass = s0.mass_m;
  sum.min_dt = std::numeric_limits<double>::infinity();

  std::size_t next = 0;
  auto emit_due = [&]() {
    while (next < targets.size() && targets[next] <= state.t) {
      if (opt.on_snapshot) opt.on_snapshot(state, next);
      ++next;
    }
  };
  emit_due();

  RkWorkspace ws;
  RhsScratch scratch;
  auto rhs_fn = [&](State& u, StateDerivative& k) {
    rhs(u, grid, params, opt.theta, k, scratch);
  };

  while (state.t < t_end) {
    rhs_fn(state, ws.k);
    const std::array<double, 2> speed = scratch.max_abs_velocity;
    const double vmax = std::max(speed[0], speed[1]);
    const double dt_step = opt.fixed_dt
                               ? *opt.fixed_dt
                               : stable_dt_from_speeds(state, speed, grid, params, opt.cfl);
    double dt = dt_step;
    const double target = next < targets.size() ? targets[next] : t_end;
    const double remaining = target - state.t;
    // Land exactly on the target instead of leaving a sliver step.
    if (dt >= remaining * (1.0 - 1e-10)) dt = remaining;

    ClampCounts clamps;
    ssp_rk3_step(state, dt, rhs_fn, ws, clamps, /*first_stage_ready=*/true);
    if (dt == remaining) state.t = target;
    fill_ghost_neumann(state, grid);

    StepStats s = measure(state, grid);
    s.dt = dt;
    s.max_abs_velocity = vmax;
    s.clamps = clamps;
    ++sum.steps;
    sum.clamps += clamps;
    // Steps shortened to land on a target do not count toward min_dt.
    sum.min_dt = std::min(sum.min_dt, dt_step);
    sum.max_abs_velocity = std::max(sum.max_abs_velocity, vmax);
    absorb(sum, s);
    if (opt.on_step) opt.on_step(state, s);
    const bool last = state.t >= t_end;
    if (opt.stats_stride > 0 && (sum.steps % opt.stats_stride == 0 || last)) {
      result.stats.push_back(s);
    }
    emit_due();
  }
  if (sum.steps == 0) sum.min_dt = 0.0;
  result.state = std::move(state);
  return result;
}

}  // namespace balo
