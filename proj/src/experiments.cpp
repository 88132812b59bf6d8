#include "balo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "balo/errors.hpp"
#include "balo/snapshot.hpp"

namespace balo {

State initial_state(const RunConfig& config) { return allocate_state(config.grid(), config.init); }

namespace {

// Largest prev_d - d over cells with prev_m > 0 (0 when none dropped).
// Ghost cells mirror interior ones, so scanning them changes nothing.
[[gnu::noinline]] double d_decrease(const std::vector<double>& prev_m,
                                    const std::vector<double>& prev_d,
                                    const std::vector<double>& d) {
  const std::size_t n = d.size();
  const double* __restrict pm = prev_m.data();
  const double* __restrict pd = prev_d.data();
  const double* __restrict cur = d.data();
  // Sign bits of the masked increments; only a set bit needs the exact pass.
  std::uint64_t bits = 0;
  for (std::size_t q = 0; q < n; ++q) {
    bits |= std::bit_cast<std::uint64_t>(pm[q] > 0.0 ? cur[q] - pd[q] : 0.0);
  }
  if (!(bits >> 63)) return 0.0;
  double worst = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    if (pm[q] > 0.0) worst = std::max(worst, pd[q] - cur[q]);
  }
  return worst;
}

}  // namespace

RunOutcome simulate(const RunConfig& config, const SimulateOptions& opt) {
  RunOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    out.grid = config.grid();
    const Grid& grid = out.grid;
    State state = initial_state(config);
    AdvanceOptions adv = config.advance_options();
    adv.stats_stride = 0;

    const std::string echo = echo_config(config);
    if (opt.snapshot_dir) std::filesystem::create_directories(*opt.snapshot_dir);
    adv.on_snapshot = [&](const State& s, std::size_t k) {
      if (opt.keep_snapshots) out.snapshots.push_back(s);
      if (opt.snapshot_dir) {
        const std::string name = opt.stem + "_" + std::to_string(k) + ".csv";
        write_snapshot(s, grid, SnapshotMeta{echo, kCodeVersion, opt.stem}, *opt.snapshot_dir / name);
        out.snapshot_files.push_back(name);
      }
    };

    // Probes never alter the step sequence: they read the first state at
    // or past each probe instant.
    const double t0 = state.t;
    const double horizon = config.t_end - t0;
    std::vector<double> probes;
    if (opt.track_growth) {
      for (double f : {0.5, 0.625, 0.75, 0.875, 1.0}) probes.push_back(t0 + f * horizon);
    }
    std::size_t next_probe = 0;
    std::vector<double> prev_m, prev_d;
    if (opt.track_d_monotonicity) {
      prev_m = state.m;
      prev_d = state.d;
    }
    adv.on_step = [&](const State& s, const StepStats& st) {
      while (next_probe < probes.size() && s.t >= probes[next_probe]) {
        out.growth_probe_m.push_back(st.max_m);
        out.growth_probe_c.push_back(st.linf_c);
        ++next_probe;
      }
      if (opt.track_d_monotonicity) {
        out.max_d_decrease = std::max(out.max_d_decrease, d_decrease(prev_m, prev_d, s.d));
        prev_m = s.m;
        prev_d = s.d;
      }
    };
    out.result = advance_to(std::move(state), config.t_end, grid, config.params, adv);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double max_d_over(const std::vector<RunOutcome>& runs) {
  double out = 0.0;
  for (const RunOutcome& r : runs) {
    if (r.ok) out = std::max(out, r.result.summary.max_d);
  }
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b, const Grid& grid) {
  if (a.size() != grid.size() || b.size() != grid.size()) {
    throw ShapeError("l1_distance: field sizes do not match the grid");
  }
  double sum = 0.0;
  const int rows = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t q = grid.index(i, j);
      sum += std::abs(a[q] - b[q]);
    }
  }
  return sum * grid.cell_volume();
}

std::vector<double> restrict_to_coarse(const std::vector<double>& fine, const Grid& fine_grid,
                                       const Grid& coarse) {
  if (fine_grid.nx != 2 * coarse.nx || (coarse.dim == 2 && fine_grid.ny != 2 * coarse.ny) ||
      fine_grid.dim != coarse.dim || fine.size() != fine_grid.size()) {
    throw ShapeError("restrict_to_coarse: grids are not a factor-2 refinement pair");
  }
  std::vector<double> out(coarse.size(), 0.0);
  if (coarse.dim == 1) {
    for (int i = 0; i < coarse.nx; ++i) {
      out[coarse.index(i)] = 0.5 * (fine[fine_grid.index(2 * i)] + fine[fine_grid.index(2 * i + 1)]);
    }
  } else {
    for (int j = 0; j < coarse.ny; ++j) {
      for (int i = 0; i < coarse.nx; ++i) {
        out[coarse.index(i, j)] =
            0.25 * (fine[fine_grid.index(2 * i, 2 * j)] + fine[fine_grid.index(2 * i + 1, 2 * j)] +
                    fine[fine_grid.index(2 * i, 2 * j + 1)] +
                    fine[fine_grid.index(2 * i + 1, 2 * j + 1)]);
      }
    }
  }
  return out;
}

double support_width(const std::vector<double>& m, const Grid& grid, double threshold) {
  std::size_t count = 0;
  const int rows = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < grid.nx; ++i) count += m[grid.index(i, j)] > threshold ? 1 : 0;
  }
  const double measure = static_cast<double>(count) * grid.cell_volume();
  if (grid.dim == 1) return measure;
  return 2.0 * std::sqrt(measure / std::numbers::pi);
}

std::vector<double> radial_average(const std::vector<double>& field, const Grid& grid) {
  const double cx = 0.5 * grid.lx;
  const double cy = 0.5 * grid.ly;
  const double r_max = grid.dim == 2 ? 0.5 * std::min(grid.lx, grid.ly) : 0.5 * grid.lx;
  const double bin = grid.dx;
  const auto bins = static_cast<std::size_t>(std::floor(r_max / bin));
  std::vector<double> sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  const int rows = grid.dim == 2 ? grid.ny : 1;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x_center(i) - cx;
      const double y = grid.dim == 2 ? grid.y_center(j) - cy : 0.0;
      const auto k = static_cast<std::size_t>(std::floor(std::hypot(x, y) / bin));
      if (k >= bins) continue;
      sum[k] += field[grid.index(i, j)];
      ++count[k];
    }
  }
  std::vector<double> avg;
  avg.reserve(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    if (count[k] > 0) avg.push_back(sum[k] / static_cast<double>(count[k]));
  }
  return avg;
}

int count_interior_maxima(const std::vector<double>& profile, double prominence) {
  const std::size_t n = profile.size();
  int found = 0;
  std::size_t k = 1;
  while (k + 1 < n) {
    // Plateaus count once: extend over equal neighbours.
    std::size_t end = k;
    while (end + 1 < n && profile[end + 1] == profile[k]) ++end;
    if (end + 1 >= n) break;
    const double v = profile[k];
    if (v > profile[k - 1] && v > profile[end + 1]) {
      // Lowest point between this peak and any higher ground on each side.
      double left_floor = v;
      for (std::size_t a = k; a-- > 0;) {
        left_floor = std::min(left_floor, profile[a]);
        if (profile[a] > v) break;
      }
      double right_floor = v;
      for (std::size_t b = end + 1; b < n; ++b) {
        right_floor = std::min(right_floor, profile[b]);
        if (profile[b] > v) break;
      }
      if (v - std::max(left_floor, right_floor) >= prominence) ++found;
    }
    k = end + 1;
  }
  return found;
}

// ---------------------------------------------------------------------------
// Invariant audit

namespace {

std::string run_failure_note(const std::string& what, const RunOutcome& run) {
  return what + " aborted: " + run.error;
}

// Growth over the last quarter of the horizon beyond that of the preceding
// quarter; positive values mean accelerating growth.
double late_growth_excess(const std::vector<double>& probe) {
  if (probe.size() < 5) return 0.0;
  const double mid = probe[2] - probe[0];
  const double late = probe[4] - probe[2];
  return late - std::max(mid, 0.0);
}

}  // namespace

ExperimentReport run_invariant_audit(const RunConfig& config, const ExperimentOptions& opt) {
  ExperimentReport rep;
  rep.id = "audit:" + config.experiment;
  rep.config_digest = config_digest(config);

  SimulateOptions so;
  so.track_d_monotonicity = true;
  so.track_growth = true;
  if (!opt.output_dir.empty()) so.snapshot_dir = opt.output_dir / "snapshots";
  so.stem = config.experiment;
  const RunOutcome run = simulate(config, so);
  for (const auto& f : run.snapshot_files) rep.snapshots.push_back("snapshots/" + f);
  if (opt.log) opt.log(config.experiment + ": " + (run.ok ? "done" : "aborted") + " in " +
                       format_short(run.seconds) + " s");

  rep.at_least("completed", run.ok ? 1.0 : 0.0, 1.0);
  if (!run.ok) {
    rep.note(run_failure_note("run", run));
    return rep;
  }
  const RunSummary& s = run.result.summary;
  rep.at_least("min_m", s.min_m, 0.0);
  rep.at_most("clamp_activations", static_cast<double>(s.clamps.total()), 0.0);
  rep.at_most("max_d", s.max_d, 1.0 + 1e-12);
  rep.at_most("max_d_decrease_where_m_positive", run.max_d_decrease, 0.0);
  if (config.params.mu == 0.0) {
    const double rel = s.mass0 > 0.0 ? s.max_abs_mass_drift / s.mass0 : s.max_abs_mass_drift;
    rep.at_most("mass_drift_relative", rel, 1e-10);
  } else {
    const double bound = std::max(s.mass0, config.grid().domain_measure());
    rep.at_most("mass_over_bound", s.max_mass / bound, 1.0 + 1e-6);
  }
  rep.at_most("linf_m", s.max_m, config.linf_ceiling);
  rep.at_most("linf_c", s.max_linf_c, config.linf_ceiling);
  const double scale_m = std::max(1.0, s.max_m);
  const double scale_c = std::max(1.0, s.max_linf_c);
  rep.at_most("late_growth_excess_m", late_growth_excess(run.growth_probe_m), 1e-6 * scale_m);
  rep.at_most("late_growth_excess_c", late_growth_excess(run.growth_probe_c), 1e-6 * scale_c);
  rep.at_least("steps", static_cast<double>(s.steps), config.t_end > 0.0 ? 1.0 : 0.0);
  return rep;
}

// ---------------------------------------------------------------------------
// Self-convergence

namespace {

struct FieldRef {
  const char* name;
  std::vector<double> State::*member;
};
constexpr FieldRef kFields[] = {{"m", &State::m}, {"c", &State::c}, {"d", &State::d}};

// Differences below this fraction of the field's L1 size are treated as
// exact agreement (no order can be observed).
constexpr double kRoundoffFloor = 1e-13;

void add_orders(ExperimentReport& rep, const std::string& prefix,
                const std::vector<std::array<double, 3>>& diffs,
                const std::vector<std::array<double, 3>>& scale, double lo, double hi) {
  for (std::size_t f = 0; f < 3; ++f) {
    const std::string field = kFields[f].name;
    double worst = 0.0;
    bool resolved = true;
    for (std::size_t l = 0; l < diffs.size(); ++l) {
      worst = std::max(worst, diffs[l][f]);
      if (diffs[l][f] <= kRoundoffFloor * std::max(scale[l][f], 1e-300)) resolved = false;
    }
    std::string listing = prefix + " L1 differences of " + field + ":";
    for (const auto& d : diffs) listing += " " + format_double(d[f]);
    rep.note(listing);
    if (!resolved) {
      rep.at_most(prefix + "_max_diff_" + field, worst, 1e-12);
      continue;
    }
    for (std::size_t l = 0; l + 1 < diffs.size(); ++l) {
      const double p = std::log2(diffs[l][f] / diffs[l + 1][f]);
      rep.within(prefix + "_order_" + field + "[" + std::to_string(l) + "]", p, lo, hi);
    }
  }
}

double l1_norm(const std::vector<double>& v, const Grid& grid) {
  std::vector<double> zero(v.size(), 0.0);
  return l1_distance(v, zero, grid);
}

}  // namespace

ExperimentReport run_convergence_study(const RunConfig& config, int levels,
                                       const ExperimentOptions& opt) {
  if (levels < 3) throw ConfigError("convergence study needs levels >= 3");
  ExperimentReport rep;
  rep.id = "converge:" + config.experiment;
  rep.config_digest = config_digest(config);
  const bool space = config.study == "space" || config.study == "both";
  const bool time = config.study == "time" || config.study == "both";
  if (space && config.init.kind == InitPreset::Kind::Custom) {
    throw ConfigError("spatial study needs a preset initial condition, not custom-file data");
  }

  auto log = [&](const std::string& s) {
    if (opt.log) opt.log(s);
  };

  if (space) {
    std::vector<RunConfig> cfgs(levels, config);
    for (int l = 0; l < levels; ++l) {
      cfgs[l].nx = config.nx << l;
      if (config.dimension == 2) cfgs[l].ny = (config.ny > 0 ? config.ny : config.nx) << l;
      cfgs[l].snapshot_times.clear();
      cfgs[l].snapshot_every.reset();
    }
    std::vector<RunOutcome> runs(levels);
    parallel_for(levels, opt.threads, [&](std::size_t l) {
      runs[l] = simulate(cfgs[l]);
      log("space level " + std::to_string(l) + " (nx = " + std::to_string(cfgs[l].nx) + "): " +
          (runs[l].ok ? "done" : "aborted") + " in " + format_short(runs[l].seconds) + " s");
    });
    bool ok = true;
    for (int l = 0; l < levels; ++l) {
      if (!runs[l].ok) {
        ok = false;
        rep.note(run_failure_note("space level " + std::to_string(l), runs[l]));
      }
    }
    rep.at_least("space_runs_completed", ok ? 1.0 : 0.0, 1.0);
    if (ok) {
      std::vector<std::array<double, 3>> diffs, scale;
      for (int l = 0; l + 1 < levels; ++l) {
        const Grid& gc = runs[l].grid;
        const Grid& gf = runs[l + 1].grid;
        std::array<double, 3> d{}, s{};
        for (std::size_t f = 0; f < 3; ++f) {
          const auto& coarse = runs[l].result.state.*kFields[f].member;
          const auto& fine = runs[l + 1].result.state.*kFields[f].member;
          d[f] = l1_distance(coarse, restrict_to_coarse(fine, gf, gc), gc);
          s[f] = l1_norm(coarse, gc);
        }
        diffs.push_back(d);
        scale.push_back(s);
      }
      add_orders(rep, "space", diffs, scale, 1.8, 2.3);
      rep.at_most("space_max_d", max_d_over(runs), 1.0 + 1e-12);
    }
  }

  if (time) {
    // Base step count: explicit, or the CFL step of the initial state
    // rounded so the horizon is an integer number of steps.
    long base = config.time_steps;
    if (base <= 0) {
      State s0 = initial_state(config);
      const double dt = stable_dt(s0, config.grid(), config.params, config.cfl, config.theta);
      base = std::max(1L, static_cast<long>(std::ceil(config.t_end / dt)));
    }
    std::vector<RunConfig> cfgs(levels, config);
    for (int l = 0; l < levels; ++l) {
      cfgs[l].fixed_dt = config.t_end / static_cast<double>(base << l);
      cfgs[l].snapshot_times.clear();
      cfgs[l].snapshot_every.reset();
    }
    std::vector<RunOutcome> runs(levels);
    parallel_for(levels, opt.threads, [&](std::size_t l) {
      runs[l] = simulate(cfgs[l]);
      log("time level " + std::to_string(l) + " (" + std::to_string(base << l) + " steps): " +
          (runs[l].ok ? "done" : "aborted") + " in " + format_short(runs[l].seconds) + " s");
    });
    bool ok = true;
    for (int l = 0; l < levels; ++l) {
      if (!runs[l].ok) {
        ok = false;
        rep.note(run_failure_note("time level " + std::to_string(l), runs[l]));
      }
    }
    rep.at_least("time_runs_completed", ok ? 1.0 : 0.0, 1.0);
    if (ok) {
      std::vector<std::array<double, 3>> diffs, scale;
      const Grid& g = runs[0].grid;
      for (int l = 0; l + 1 < levels; ++l) {
        std::array<double, 3> d{}, s{};
        for (std::size_t f = 0; f < 3; ++f) {
          const auto& a = runs[l].result.state.*kFields[f].member;
          const auto& b = runs[l + 1].result.state.*kFields[f].member;
          d[f] = l1_distance(a, b, g);
          s[f] = l1_norm(a, g);
        }
        diffs.push_back(d);
        scale.push_back(s);
      }
      add_orders(rep, "time", diffs, scale, 2.7, 3.2);
      rep.at_most("time_max_d", max_d_over(runs), 1.0 + 1e-12);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// epsilon sweep

ExperimentReport run_epsilon_sweep(const RunConfig& config, const std::vector<double>& eps_list,
                                   const ExperimentOptions& opt) {
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double e = eps_list[k];
    if (!(e >= 0.0 && e < 1.0)) throw ConfigError("eps-sweep: every epsilon must lie in [0, 1)");
    if (k > 0 && e > eps_list[k - 1]) {
      throw ConfigError("eps-sweep: the epsilon list must be non-increasing");
    }
  }
  ExperimentReport rep;
  rep.id = "eps-sweep:" + config.experiment;
  rep.config_digest = config_digest(config);

  const std::size_t n = eps_list.size();
  std::vector<RunOutcome> runs(n);
  parallel_for(n, opt.threads, [&](std::size_t k) {
    RunConfig cfg = config;
    cfg.params.epsilon = eps_list[k];
    cfg.snapshot_times.clear();
    cfg.snapshot_every.reset();
    runs[k] = simulate(cfg);
    if (opt.log) {
      opt.log("epsilon = " + format_short(eps_list[k]) + ": " + (runs[k].ok ? "done" : "aborted") +
              " in " + format_short(runs[k].seconds) + " s");
    }
  });
  bool ok = true;
  for (std::size_t k = 0; k < n; ++k) {
    if (!runs[k].ok) {
      ok = false;
      rep.note(run_failure_note("epsilon = " + format_short(eps_list[k]), runs[k]));
    }
  }
  rep.at_least("runs_completed", ok ? 1.0 : 0.0, 1.0);
  if (!ok) return rep;
  rep.at_most("max_d", max_d_over(runs), 1.0 + 1e-12);
  if (n < 2) return rep;

  const RunOutcome& ref = runs.back();
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dist = l1_distance(runs[k].result.state.m, ref.result.state.m, ref.grid);
    const std::string name = "l1_distance_m[eps=" + format_short(eps_list[k]) + "]";
    if (k == 0) {
      rep.at_least(name, dist, 0.0);
    } else {
      rep.at_most(name, dist, previous);
    }
    previous = dist;
  }
  return rep;
}

}  // namespace balo
