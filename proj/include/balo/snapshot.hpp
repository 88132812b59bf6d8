#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "balo/grid.hpp"

namespace balo {

/// Contents of the companion `.meta` file.
struct SnapshotMeta {
  std::string config_echo;
  std::string code_version;
  std::string label;
};

/// Interior fields as read back from a snapshot file (row-major, j outer).
struct SnapshotData {
  double t = 0.0;
  int dim = 1;
  int nx = 0;
  int ny = 1;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> m;
  std::vector<double> c;
  std::vector<double> d;

  /// Places the fields into a ghosted State for `grid` (ghosts filled).
  State to_state(const Grid& grid) const;
};

inline constexpr const char* kSnapshotHeader = "t,i,j,x,y,m,c,d";

/// Writes `path` (CSV, header kSnapshotHeader, one row per interior cell,
/// j outer / i inner, 17 significant digits) and `path` + ".meta".
/// Throws std::runtime_error naming the path on I/O failure.
void write_snapshot(const State& state, const Grid& grid, const SnapshotMeta& meta,
                    const std::filesystem::path& path);

SnapshotData read_snapshot(const std::filesystem::path& path);

}  // namespace balo
