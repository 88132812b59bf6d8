#include "balo/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "balo/config.hpp"
#include "balo/errors.hpp"
#include "balo/experiments.hpp"
#include "balo/snapshot.hpp"

namespace balo {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BALO_FV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError(std::string("BALO_FV_THREADS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

constexpr const char* kDefaultEps = "1e-1,1e-2,1e-3,1e-4,0";

struct Globals {
  std::string output_dir;
  bool quiet = false;
  int threads = 0;
};

ExperimentReport run_plain(const RunConfig& config, const ExperimentOptions& opt) {
  ExperimentReport rep;
  rep.id = "run:" + config.experiment;
  rep.config_digest = config_digest(config);
  SimulateOptions so;
  so.stem = config.experiment;
  so.snapshot_dir = opt.output_dir / "snapshots";
  const RunOutcome run = simulate(config, so);
  for (const auto& f : run.snapshot_files) rep.snapshots.push_back("snapshots/" + f);
  rep.at_least("completed", run.ok ? 1.0 : 0.0, 1.0);
  if (!run.ok) {
    rep.note("run aborted: " + run.error);
    return rep;
  }
  const RunSummary& s = run.result.summary;
  rep.note("steps " + std::to_string(s.steps) + ", min dt " + format_double(s.min_dt) + ", " +
           format_short(run.seconds) + " s");
  rep.note("min m " + format_double(s.min_m) + ", max m " + format_double(s.max_m) + ", max d " +
           format_double(s.max_d) + ", clamp activations " + std::to_string(s.clamps.total()));
  return rep;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Finite-volume solver for a degenerate chemotaxis-haptotaxis model", "balo_fv"};
  app.set_version_flag("--version", std::string(kCodeVersion));
  Globals g;
  app.add_option("--output-dir", g.output_dir, "Output directory (overrides the config)");
  app.add_flag("--quiet", g.quiet, "Only the exit code reports the outcome");
  app.add_option("--threads", g.threads, "Worker threads for independent runs")
      ->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  std::string config_path;
  int levels = 0;
  std::string eps_text;
  auto* run = app.add_subcommand("run", "Integrate one config and write snapshots");
  auto* audit = app.add_subcommand("audit", "Run with the invariant monitors");
  auto* converge = app.add_subcommand("converge", "Richardson self-convergence study");
  auto* weak = app.add_subcommand("weak-check", "Weak-form residual decay under refinement");
  auto* eps = app.add_subcommand("eps-sweep", "Regularization sweep over epsilon");
  auto* figures = app.add_subcommand("figures", "Linear vs porous-medium panel runs");
  for (auto* sub : {run, audit, converge, weak, eps, figures}) {
    sub->add_option("config", config_path, "Config file")->required();
    sub->fallthrough();
  }
  converge->add_option("--levels", levels, "Refinement levels (>= 3)");
  eps->add_option("--eps", eps_text, "Descending epsilon list; the last entry is the reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  ExperimentReport report;
  std::filesystem::path out_dir;
  try {
    const RunConfig config = parse_config(config_path);
    out_dir = g.output_dir.empty() ? std::filesystem::path(config.output_dir)
                                   : std::filesystem::path(g.output_dir);
    ExperimentOptions opt;
    opt.output_dir = out_dir;
    opt.threads = resolve_threads(g.threads);
    if (!g.quiet) opt.log = [](const std::string& line) { std::cerr << line << '\n'; };
    std::filesystem::create_directories(out_dir);

    if (run->parsed()) {
      report = run_plain(config, opt);
    } else if (audit->parsed()) {
      report = run_invariant_audit(config, opt);
    } else if (converge->parsed()) {
      report = run_convergence_study(config, levels > 0 ? levels : config.levels, opt);
    } else if (weak->parsed()) {
      report = run_weak_residual_check(config, default_test_functions(config.dimension), opt);
    } else if (eps->parsed()) {
      std::vector<double> list = config.eps_list;
      if (!eps_text.empty()) list = parse_number_list(eps_text);
      if (list.empty()) list = parse_number_list(kDefaultEps);
      report = run_epsilon_sweep(config, list, opt);
    } else {
      report = run_figure_comparison(config, opt);
    }
  } catch (const std::exception& e) {
    // Config parsing and validation, unreadable files, bad option values.
    // Solver aborts never reach here: drivers record them as failed metrics.
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    report.write(out_dir / (name + ".report"));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMetricFailure;
  }
  if (!g.quiet) std::cout << report.serialize();
  return report.all_pass() ? kExitPass : kExitMetricFailure;
}

}  // namespace balo
