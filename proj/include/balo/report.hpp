#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace balo {

inline constexpr const char* kCodeVersion = BALO_FV_VERSION;

struct Metric {
  enum class Check { AtMost, AtLeast, Within };
  std::string name;
  double value = 0.0;
  Check check = Check::AtMost;
  double threshold = 0.0;
  double threshold_hi = 0.0;  ///< upper bound for Within
  bool pass = false;

  std::string threshold_text() const;
};

/// Experiment outcome: one thresholded metric per line plus a snapshot
/// manifest.  Serialization is deterministic (17 significant digits).
struct ExperimentReport {
  std::string id;
  std::string config_digest;
  std::vector<Metric> metrics;
  std::vector<std::string> snapshots;
  /// Free-text remarks (solver aborts and the like), one line each.
  std::vector<std::string> notes;

  Metric& at_most(const std::string& name, double value, double threshold);
  Metric& at_least(const std::string& name, double value, double threshold);
  Metric& within(const std::string& name, double value, double lo, double hi);
  void add(Metric m);
  void note(const std::string& text);

  bool all_pass() const;
  const Metric* find(const std::string& name) const;
  std::string serialize() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace balo
