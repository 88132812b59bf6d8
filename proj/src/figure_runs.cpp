#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "balo/errors.hpp"
#include "balo/experiments.hpp"

namespace balo {

namespace {

struct Panel {
  std::string id;
  DiffusionMode mode;
  double chi;
};

// The four figure panels, then the chi = 0 pair used for the front contrast.
const std::vector<Panel>& panels() {
  static const std::vector<Panel> list = {
      {"linear_chi4", DiffusionMode::Linear, 4.0},   {"porous_chi4", DiffusionMode::PorousMedium, 4.0},
      {"linear_chi10", DiffusionMode::Linear, 10.0}, {"porous_chi10", DiffusionMode::PorousMedium, 10.0},
      {"linear_chi0", DiffusionMode::Linear, 0.0},   {"porous_chi0", DiffusionMode::PorousMedium, 0.0},
  };
  return list;
}

constexpr double kPanelFractions[] = {0.25, 0.5, 0.75, 1.0};
constexpr double kRingProminence = 1e-3;

void write_profile(const std::filesystem::path& path, const std::vector<double>& profile,
                   double bin) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "r,d_avg\n";
  char buf[64];
  for (std::size_t k = 0; k < profile.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", (k + 0.5) * bin, profile[k]);
    out << buf;
  }
}

}  // namespace

RunConfig figure_panel_config(const RunConfig& base, DiffusionMode mode, double chi) {
  RunConfig cfg = base;
  cfg.params.diffusion_mode = mode;
  if (mode == DiffusionMode::PorousMedium) cfg.params.gamma = 2.0;
  cfg.params.chi = chi;
  cfg.snapshot_every.reset();
  cfg.snapshot_times.clear();
  for (double f : kPanelFractions) cfg.snapshot_times.push_back(f * base.t_end);
  return cfg;
}

ExperimentReport run_figure_comparison(const RunConfig& config, const ExperimentOptions& opt) {
  ExperimentReport rep;
  rep.id = "figures:" + config.experiment;
  rep.config_digest = config_digest(config);

  const auto& list = panels();
  std::vector<RunOutcome> runs(list.size());
  parallel_for(list.size(), opt.threads, [&](std::size_t k) {
    const Panel& p = list[k];
    const RunConfig cfg = figure_panel_config(config, p.mode, p.chi);
    cfg.params.validate(cfg.dimension);
    SimulateOptions so;
    so.keep_snapshots = true;
    so.stem = p.id;
    if (!opt.output_dir.empty()) so.snapshot_dir = opt.output_dir / p.id;
    runs[k] = simulate(cfg, so);
    if (opt.log) {
      opt.log(p.id + ": " + (runs[k].ok ? "done" : "aborted") + " in " +
              format_short(runs[k].seconds) + " s");
    }
  });

  bool all_ok = true;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const RunOutcome& run = runs[k];
    const std::string& id = list[k].id;
    for (const auto& f : run.snapshot_files) rep.snapshots.push_back(id + "/" + f);
    rep.at_least(id + ".completed", run.ok ? 1.0 : 0.0, 1.0);
    if (!run.ok) {
      all_ok = false;
      rep.note(id + " aborted: " + run.error);
      continue;
    }
    const RunSummary& s = run.result.summary;
    rep.at_least(id + ".min_m", s.min_m, 0.0);
    rep.at_most(id + ".clamp_activations", static_cast<double>(s.clamps.total()), 0.0);
    rep.at_most(id + ".max_d", s.max_d, 1.0 + 1e-12);
  }
  if (!all_ok) return rep;

  auto find = [&](const std::string& id) -> const RunOutcome& {
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (list[k].id == id) return runs[k];
    }
    throw std::logic_error("unknown panel " + id);
  };

  // Front contrast at equal times, chi = 0.
  const RunOutcome& lin0 = find("linear_chi0");
  const RunOutcome& pm0 = find("porous_chi0");
  std::string widths = "support widths (linear / porous, chi = 0):";
  int monotone_violations = 0;
  double previous_pm = -1.0;
  for (std::size_t k = 0; k < lin0.snapshots.size() && k < pm0.snapshots.size(); ++k) {
    const double wl = support_width(lin0.snapshots[k].m, lin0.grid, config.support_threshold);
    const double wp = support_width(pm0.snapshots[k].m, pm0.grid, config.support_threshold);
    widths += " t=" + format_short(pm0.snapshots[k].t) + ": " + format_double(wl) + " / " +
              format_double(wp) + ";";
    rep.at_most("support_ratio_chi0[t=" + format_short(pm0.snapshots[k].t) + "]",
                wl > 0.0 ? wp / wl : 1.0, 0.8);
    if (wp < previous_pm) ++monotone_violations;
    previous_pm = wp;
  }
  rep.note(widths);
  rep.at_most("porous_chi0.support_decreases", monotone_violations, 0.0);

  // Ring indicator on the porous, chi = 10 panel.
  const RunOutcome& ring = find("porous_chi10");
  const std::vector<double> profile = radial_average(ring.result.state.d, ring.grid);
  if (!opt.output_dir.empty()) {
    write_profile(opt.output_dir / "porous_chi10" / "radial_d.csv", profile, ring.grid.dx);
    rep.snapshots.push_back("porous_chi10/radial_d.csv");
  }
  const int maxima = count_interior_maxima(profile, kRingProminence);
  if (config.dimension == 2) {
    rep.at_least("porous_chi10.ring_maxima", maxima, 1.0);
  } else {
    rep.note("porous_chi10 radial d maxima (1D, not gated): " + std::to_string(maxima));
  }
  return rep;
}

}  // namespace balo
