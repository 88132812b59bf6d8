#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "balo/config.hpp"
#include "balo/grid.hpp"
#include "balo/integrator.hpp"
#include "balo/report.hpp"

namespace balo {

/// Where and whether experiments write files.  An empty output_dir keeps
/// everything in memory.
struct ExperimentOptions {
  std::filesystem::path output_dir;
  int threads = 1;
  /// Progress lines (one per finished run); null for silence.
  std::function<void(const std::string&)> log;
};

/// One advance_to run with failure capture.
struct RunOutcome {
  bool ok = false;
  std::string error;  ///< what() of the aborting exception
  Grid grid;
  AdvanceResult result;
  std::vector<State> snapshots;  ///< kept when requested
  std::vector<std::string> snapshot_files;
  std::vector<double> growth_probe_m;  ///< linf m at 1/2, 5/8, 3/4, 7/8, 1 of the horizon
  std::vector<double> growth_probe_c;
  double max_d_decrease = 0.0;  ///< largest cellwise drop of d where m > 0
  double seconds = 0.0;
};

struct SimulateOptions {
  bool keep_snapshots = false;
  /// Writes each snapshot as <dir>/<stem>_<k>.csv when set.
  std::optional<std::filesystem::path> snapshot_dir;
  std::string stem = "snap";
  bool track_d_monotonicity = false;
  bool track_growth = false;
};

State initial_state(const RunConfig& config);
RunOutcome simulate(const RunConfig& config, const SimulateOptions& opt = {});

/// Largest d seen by any completed run (0 when none completed).
double max_d_over(const std::vector<RunOutcome>& runs);

/// Runs fn(0..count-1) on up to `threads` workers; exceptions are
/// rethrown on the caller after all workers joined.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Diagnostics shared by the drivers (interior cells only).
double l1_distance(const std::vector<double>& a, const std::vector<double>& b, const Grid& grid);
/// Cell-average restriction of a field on a grid refined by 2 in every
/// direction onto `coarse`.  Returns a ghosted coarse-size vector.
std::vector<double> restrict_to_coarse(const std::vector<double>& fine, const Grid& fine_grid,
                                       const Grid& coarse);
/// Measure of {m > threshold}; in 2D the diameter of the disc of equal area.
double support_width(const std::vector<double>& m, const Grid& grid, double threshold);
/// Average of `field` over rings of width dx about the domain centre, out
/// to the inscribed radius.  1D uses |x - lx/2|.
std::vector<double> radial_average(const std::vector<double>& field, const Grid& grid);
/// Interior local maxima (not the first or last bin) rising at least
/// `prominence` above the lowest value on either side of them.
int count_interior_maxima(const std::vector<double>& profile, double prominence);

enum class TestFunctionKind { Zero, Cosine, Bump };

/// Spatial factor psi of a separable test function phi = psi(x) (1 - t/T)^3.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::Cosine;
  int kx = 1;             ///< cosine mode numbers
  int ky = 0;
  double center_x = 0.5;  ///< bump centre / radius as fractions of lx
  double center_y = 0.5;
  double radius = 0.25;

  std::string name() const;
  double psi(double x, double y, const Grid& grid) const;
};

std::vector<TestFunction> default_test_functions(int dimension);

/// Weak-form residual of the m equation for phi = psi (1 - t/T)^3 from
/// snapshots at uniform instants k T / K, k = 0..K.
double weak_residual_m(const std::vector<State>& snapshots, const Grid& grid,
                       const ModelParams& params, double t_end, const TestFunction& tf);

ExperimentReport run_invariant_audit(const RunConfig& config, const ExperimentOptions& opt = {});
ExperimentReport run_convergence_study(const RunConfig& config, int levels,
                                       const ExperimentOptions& opt = {});
ExperimentReport run_weak_residual_check(const RunConfig& config,
                                         const std::vector<TestFunction>& test_functions,
                                         const ExperimentOptions& opt = {});
/// Runs one simulation per entry of eps_list; distances are measured
/// against the last entry, so a single entry yields none.
ExperimentReport run_epsilon_sweep(const RunConfig& config, const std::vector<double>& eps_list,
                                   const ExperimentOptions& opt = {});
/// Panel config: `base` with the given mode (gamma = 2 when porous) and
/// chi, snapshots at 1/4, 1/2, 3/4 and 1 of t_end.
RunConfig figure_panel_config(const RunConfig& base, DiffusionMode mode, double chi);
ExperimentReport run_figure_comparison(const RunConfig& config, const ExperimentOptions& opt = {});

}  // namespace balo
