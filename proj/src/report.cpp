#include "balo/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "balo/config.hpp"

namespace balo {

std::string Metric::threshold_text() const {
  switch (check) {
    case Check::AtMost: return "<= " + format_double(threshold);
    case Check::AtLeast: return ">= " + format_double(threshold);
    case Check::Within:
      return "in [" + format_double(threshold) + ", " + format_double(threshold_hi) + "]";
  }
  return "?";
}

void ExperimentReport::add(Metric m) {
  switch (m.check) {
    case Metric::Check::AtMost: m.pass = m.value <= m.threshold; break;
    case Metric::Check::AtLeast: m.pass = m.value >= m.threshold; break;
    case Metric::Check::Within:
      m.pass = m.value >= m.threshold && m.value <= m.threshold_hi;
      break;
  }
  metrics.push_back(std::move(m));
}

Metric& ExperimentReport::at_most(const std::string& name, double value, double threshold) {
  add(Metric{name, value, Metric::Check::AtMost, threshold, 0.0, false});
  return metrics.back();
}

Metric& ExperimentReport::at_least(const std::string& name, double value, double threshold) {
  add(Metric{name, value, Metric::Check::AtLeast, threshold, 0.0, false});
  return metrics.back();
}

Metric& ExperimentReport::within(const std::string& name, double value, double lo, double hi) {
  add(Metric{name, value, Metric::Check::Within, lo, hi, false});
  return metrics.back();
}

void ExperimentReport::note(const std::string& text) {
  std::string line = text;
  std::replace(line.begin(), line.end(), '\n', ' ');
  notes.push_back(std::move(line));
}

bool ExperimentReport::all_pass() const {
  return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.pass; });
}

const Metric* ExperimentReport::find(const std::string& name) const {
  for (const Metric& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::string ExperimentReport::serialize() const {
  std::ostringstream os;
  os << "experiment: " << id << '\n';
  os << "config_digest: " << config_digest << '\n';
  os << "code_version: " << kCodeVersion << '\n';
  for (const Metric& m : metrics) {
    os << "metric: " << m.name << ", " << format_double(m.value) << ", " << m.threshold_text()
       << ", " << (m.pass ? "PASS" : "FAIL") << '\n';
  }
  for (const std::string& s : snapshots) os << "snapshot: " << s << '\n';
  for (const std::string& n : notes) os << "note: " << n << '\n';
  os << "result: " << (all_pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

void ExperimentReport::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report '" + path.string() + "'");
  out << serialize();
  if (!out) throw std::runtime_error("write failed for report '" + path.string() + "'");
}

}  // namespace balo
