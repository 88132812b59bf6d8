#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "balo/grid.hpp"
#include "balo/integrator.hpp"
#include "balo/model.hpp"

namespace balo {

/// One run / experiment description.
///
/// File format: `key = value` lines, `#` comments, and a single `[params]`
/// section holding the ModelParams keys.  Lists are comma separated.
/// Unknown keys are errors.
struct RunConfig {
  std::string experiment = "run";
  int dimension = 1;
  int nx = 0;
  int ny = 0;  ///< 0 means "same as nx" in 2D
  double lx = 1.0;
  double ly = 1.0;
  double t_end = 0.0;
  double cfl = 0.25;
  double theta = 1.5;
  std::optional<double> fixed_dt;
  std::vector<double> snapshot_times;
  std::optional<double> snapshot_every;
  InitPreset init;
  std::string init_file;
  std::string output_dir = "out";
  ModelParams params;

  // experiment knobs
  int levels = 3;
  std::string study = "space";  ///< space | time | both
  int time_steps = 0;           ///< base fixed step count for the temporal study; 0 = from CFL
  double linf_ceiling = 1e6;
  double support_threshold = 1e-3;
  int weak_intervals = 16;      ///< snapshot intervals on the coarse weak-residual level
  std::vector<double> eps_list;

  Grid grid() const;
  /// Resolved snapshot instants (explicit times, or multiples of
  /// snapshot_every, or {t_end}).
  std::vector<double> snapshot_instants() const;
  AdvanceOptions advance_options() const;
};

/// Error carrying the offending key and line (0 when not tied to a line).
class ConfigParseError : public std::invalid_argument {
 public:
  ConfigParseError(const std::string& key, int line, const std::string& what);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

RunConfig parse_config_text(const std::string& text);
/// Reads and validates a config file; custom-file initial data is loaded
/// relative to the config's directory.
RunConfig parse_config(const std::filesystem::path& path);

/// Full canonical listing of every key (defaults included); parsing it
/// yields an equivalent config.
std::string echo_config(const RunConfig& config);

/// FNV-1a 64-bit digest of echo_config, as 16 hex digits.
std::string config_digest(const RunConfig& config);

/// Parses "a, b, c" into doubles.
std::vector<double> parse_number_list(const std::string& text);

/// Formats with 17 significant digits (round-trips every double).
std::string format_double(double v);
/// Six significant digits, for labels and log lines.
std::string format_short(double v);

}  // namespace balo
