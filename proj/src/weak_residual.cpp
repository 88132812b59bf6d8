#include <cmath>
#include <numbers>
#include <string>

#include "balo/errors.hpp"
#include "balo/experiments.hpp"

namespace balo {

std::string TestFunction::name() const {
  switch (kind) {
    case TestFunctionKind::Zero: return "zero";
    case TestFunctionKind::Cosine:
      return "cos_" + std::to_string(kx) + "_" + std::to_string(ky);
    case TestFunctionKind::Bump:
      return "bump_" + format_short(center_x) + "_" + format_short(center_y) + "_r" +
             format_short(radius);
  }
  return "?";
}

double TestFunction::psi(double x, double y, const Grid& grid) const {
  const double u = x / grid.lx;
  const double v = grid.dim == 2 ? y / grid.ly : 0.0;
  switch (kind) {
    case TestFunctionKind::Zero: return 0.0;
    case TestFunctionKind::Cosine: {
      const double fx = std::cos(kx * std::numbers::pi * u);
      return grid.dim == 2 ? fx * std::cos(ky * std::numbers::pi * v) : fx;
    }
    case TestFunctionKind::Bump: {
      const double du = u - center_x;
      const double dv = grid.dim == 2 ? v - center_y : 0.0;
      const double s = (du * du + dv * dv) / (radius * radius);
      return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
    }
  }
  return 0.0;
}

std::vector<TestFunction> default_test_functions(int dimension) {
  std::vector<TestFunction> out;
  TestFunction cos1;
  cos1.kind = TestFunctionKind::Cosine;
  cos1.kx = 1;
  out.push_back(cos1);
  TestFunction cos2 = cos1;
  cos2.kx = 2;
  if (dimension == 2) cos2.ky = 1;
  out.push_back(cos2);
  TestFunction bump;
  bump.kind = TestFunctionKind::Bump;
  bump.radius = 0.3;
  out.push_back(bump);
  TestFunction off = bump;
  off.center_x = 0.35;
  off.center_y = dimension == 2 ? 0.4 : 0.5;
  off.radius = 0.2;
  out.push_back(off);
  return out;
}

// Residual of the m equation tested against phi = psi (1 - t/T)^3:
//   - int int m phi_t - int m0 phi(0) + int int grad Phi(m) . grad phi
//   - chi int int f(m) grad c . grad phi - int int M(m) phi.
// Midpoint rule in time with fields averaged over each snapshot interval;
// gradients as face differences, f at the face average of m.
double weak_residual_m(const std::vector<State>& snapshots, const Grid& grid,
                       const ModelParams& params, double t_end, const TestFunction& tf) {
  if (snapshots.size() < 2) throw ConfigError("weak residual needs at least two snapshots");
  if (!(t_end > 0.0)) throw ConfigError("weak residual needs t_end > 0");
  const int rows = grid.dim == 2 ? grid.ny : 1;
  std::vector<double> psi(grid.size(), 0.0);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      psi[grid.index(i, j)] = tf.psi(grid.x_center(i), grid.y_center(j), grid);
    }
  }
  const double vol = grid.cell_volume();
  const double T = t_end;

  double residual = 0.0;
  const State& s0 = snapshots.front();
  if (std::abs(s0.t) > 1e-12 * T) throw ConfigError("weak residual: first snapshot must sit at t = 0");
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t q = grid.index(i, j);
      residual -= s0.m[q] * psi[q] * vol;
    }
  }

  std::vector<double> m_bar(grid.size()), c_bar(grid.size()), phi_m(grid.size());
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const State& a = snapshots[k];
    const State& b = snapshots[k + 1];
    const double dt = b.t - a.t;
    const double tm = 0.5 * (a.t + b.t);
    const double w = 1.0 - tm / T;
    const double time_factor = w * w * w;
    const double time_rate = -3.0 / T * w * w;
    for (std::size_t q = 0; q < grid.size(); ++q) {
      m_bar[q] = 0.5 * (a.m[q] + b.m[q]);
      c_bar[q] = 0.5 * (a.c[q] + b.c[q]);
    }

    double mass_term = 0.0, reaction = 0.0;
    for (int j = 0; j < rows; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        const std::size_t q = grid.index(i, j);
        phi_m[q] = diffusion_primitive(m_bar[q], params);
        mass_term += m_bar[q] * psi[q];
        reaction += reaction_m(m_bar[q], params) * psi[q];
      }
    }

    // Interior faces only: the Neumann boundary carries no flux.
    double diffusion = 0.0, taxis = 0.0;
    auto face = [&](std::size_t l, std::size_t r, double h) {
      const double grad_psi = (psi[r] - psi[l]) / h;
      diffusion += (phi_m[r] - phi_m[l]) / h * grad_psi;
      const double mf = 0.5 * (m_bar[l] + m_bar[r]);
      taxis += mf * chemo_sensitivity(mf, params) * (c_bar[r] - c_bar[l]) / h * grad_psi;
    };
    for (int j = 0; j < rows; ++j) {
      for (int i = 0; i + 1 < grid.nx; ++i) face(grid.index(i, j), grid.index(i + 1, j), grid.dx);
    }
    if (grid.dim == 2) {
      for (int j = 0; j + 1 < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) face(grid.index(i, j), grid.index(i, j + 1), grid.dy);
      }
    }

    residual += dt * vol *
                (-mass_term * time_rate +
                 time_factor * (diffusion - params.chi * taxis - reaction));
  }
  return residual;
}

ExperimentReport run_weak_residual_check(const RunConfig& config,
                                         const std::vector<TestFunction>& test_functions,
                                         const ExperimentOptions& opt) {
  ExperimentReport rep;
  rep.id = "weak-check:" + config.experiment;
  rep.config_digest = config_digest(config);
  if (config.init.kind == InitPreset::Kind::Custom) {
    throw ConfigError("weak-check refines the grid and needs a preset initial condition");
  }

  constexpr int kLevels = 2;
  std::vector<RunConfig> cfgs(kLevels, config);
  for (int l = 0; l < kLevels; ++l) {
    const int intervals = config.weak_intervals << l;
    cfgs[l].nx = config.nx << l;
    if (config.dimension == 2) cfgs[l].ny = (config.ny > 0 ? config.ny : config.nx) << l;
    cfgs[l].snapshot_every.reset();
    cfgs[l].snapshot_times.clear();
    for (int k = 0; k <= intervals; ++k) {
      cfgs[l].snapshot_times.push_back(config.t_end * k / intervals);
    }
  }
  std::vector<RunOutcome> runs(kLevels);
  SimulateOptions so;
  so.keep_snapshots = true;
  parallel_for(kLevels, opt.threads, [&](std::size_t l) {
    runs[l] = simulate(cfgs[l], so);
    if (opt.log) {
      opt.log("weak level " + std::to_string(l) + ": " + (runs[l].ok ? "done" : "aborted") +
              " in " + format_short(runs[l].seconds) + " s");
    }
  });
  bool ok = true;
  for (int l = 0; l < kLevels; ++l) {
    if (!runs[l].ok) {
      ok = false;
      rep.note("level " + std::to_string(l) + " aborted: " + runs[l].error);
    }
  }
  rep.at_least("runs_completed", ok ? 1.0 : 0.0, 1.0);
  if (!ok) return rep;
  rep.at_most("max_d", max_d_over(runs), 1.0 + 1e-12);

  double total_coarse = 0.0, total_fine = 0.0;
  for (const TestFunction& tf : test_functions) {
    const double r0 = std::abs(
        weak_residual_m(runs[0].snapshots, runs[0].grid, config.params, config.t_end, tf));
    const double r1 = std::abs(
        weak_residual_m(runs[1].snapshots, runs[1].grid, config.params, config.t_end, tf));
    total_coarse += r0;
    total_fine += r1;
    rep.note("residual " + tf.name() + ": coarse " + format_double(r0) + " fine " +
             format_double(r1));
    if (r0 <= 1e-14) {
      rep.at_most("residual_fine[" + tf.name() + "]", r1, 1e-12);
    } else {
      rep.at_most("residual_fine[" + tf.name() + "]", r1, r0);
    }
  }
  if (total_coarse > 1e-14) {
    rep.at_least("residual_ratio", total_coarse / total_fine, 1.5);
  }
  return rep;
}

}  // namespace balo
