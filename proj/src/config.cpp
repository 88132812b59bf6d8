#include "balo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "balo/errors.hpp"
#include "balo/snapshot.hpp"

namespace balo {

ConfigParseError::ConfigParseError(const std::string& key, int line, const std::string& what)
    : std::invalid_argument(
          (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "key '" + key +
          "': " + what),
      key_(key),
      line_(line) {}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, int line, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw ConfigParseError(key, line, "expected a finite number, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, int line, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigParseError(key, line, "expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, int line, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigParseError(key, line, "expected true|false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, int line, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigParseError(key, line, "empty list entry");
    out.push_back(to_double(key, line, item));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, int line,
                                  const std::string& value)>;

const std::map<std::string, Setter>& top_level_keys() {
  static const std::map<std::string, Setter> keys = {
      {"experiment", [](RunConfig& c, auto&, int, auto& v) { c.experiment = v; }},
      {"dimension", [](RunConfig& c, auto& k, int l, auto& v) { c.dimension = to_int(k, l, v); }},
      {"nx", [](RunConfig& c, auto& k, int l, auto& v) { c.nx = to_int(k, l, v); }},
      {"ny", [](RunConfig& c, auto& k, int l, auto& v) { c.ny = to_int(k, l, v); }},
      {"lx", [](RunConfig& c, auto& k, int l, auto& v) { c.lx = to_double(k, l, v); }},
      {"ly", [](RunConfig& c, auto& k, int l, auto& v) { c.ly = to_double(k, l, v); }},
      {"t_end", [](RunConfig& c, auto& k, int l, auto& v) { c.t_end = to_double(k, l, v); }},
      {"cfl", [](RunConfig& c, auto& k, int l, auto& v) { c.cfl = to_double(k, l, v); }},
      {"theta_limiter",
       [](RunConfig& c, auto& k, int l, auto& v) { c.theta = to_double(k, l, v); }},
      {"fixed_dt",
       [](RunConfig& c, auto& k, int l, auto& v) {
         if (v != "none") c.fixed_dt = to_double(k, l, v);
       }},
      {"snapshot_times",
       [](RunConfig& c, auto& k, int l, auto& v) {
         c.snapshot_times = v == "none" ? std::vector<double>{} : to_list(k, l, v);
       }},
      {"snapshot_every",
       [](RunConfig& c, auto& k, int l, auto& v) {
         if (v != "none") c.snapshot_every = to_double(k, l, v);
       }},
      {"init_preset",
       [](RunConfig& c, auto& k, int l, auto& v) {
         try {
           c.init.kind = preset_kind_from_string(v);
         } catch (const ConfigError& e) {
           throw ConfigParseError(k, l, e.what());
         }
       }},
      {"amplitude",
       [](RunConfig& c, auto& k, int l, auto& v) { c.init.amplitude = to_double(k, l, v); }},
      {"sigma_fraction",
       [](RunConfig& c, auto& k, int l, auto& v) { c.init.sigma_fraction = to_double(k, l, v); }},
      {"center_x",
       [](RunConfig& c, auto& k, int l, auto& v) { c.init.center_x = to_double(k, l, v); }},
      {"center_y",
       [](RunConfig& c, auto& k, int l, auto& v) { c.init.center_y = to_double(k, l, v); }},
      {"m0", [](RunConfig& c, auto& k, int l, auto& v) { c.init.m0 = to_double(k, l, v); }},
      {"c0", [](RunConfig& c, auto& k, int l, auto& v) { c.init.c0 = to_double(k, l, v); }},
      {"d0", [](RunConfig& c, auto& k, int l, auto& v) { c.init.d0 = to_double(k, l, v); }},
      {"init_file", [](RunConfig& c, auto&, int, auto& v) { c.init_file = v; }},
      {"output_dir", [](RunConfig& c, auto&, int, auto& v) { c.output_dir = v; }},
      {"levels", [](RunConfig& c, auto& k, int l, auto& v) { c.levels = to_int(k, l, v); }},
      {"study", [](RunConfig& c, auto&, int, auto& v) { c.study = v; }},
      {"time_steps",
       [](RunConfig& c, auto& k, int l, auto& v) { c.time_steps = to_int(k, l, v); }},
      {"linf_ceiling",
       [](RunConfig& c, auto& k, int l, auto& v) { c.linf_ceiling = to_double(k, l, v); }},
      {"support_threshold",
       [](RunConfig& c, auto& k, int l, auto& v) { c.support_threshold = to_double(k, l, v); }},
      {"weak_intervals",
       [](RunConfig& c, auto& k, int l, auto& v) { c.weak_intervals = to_int(k, l, v); }},
      {"eps_list",
       [](RunConfig& c, auto& k, int l, auto& v) {
         c.eps_list = v == "none" ? std::vector<double>{} : to_list(k, l, v);
       }},
  };
  return keys;
}

const std::map<std::string, Setter>& param_keys() {
  static const std::map<std::string, Setter> keys = {
      {"gamma", [](RunConfig& c, auto& k, int l, auto& v) { c.params.gamma = to_double(k, l, v); }},
      {"chi", [](RunConfig& c, auto& k, int l, auto& v) { c.params.chi = to_double(k, l, v); }},
      {"mu", [](RunConfig& c, auto& k, int l, auto& v) { c.params.mu = to_double(k, l, v); }},
      {"delta", [](RunConfig& c, auto& k, int l, auto& v) { c.params.delta = to_double(k, l, v); }},
      {"tau", [](RunConfig& c, auto& k, int l, auto& v) { c.params.tau = to_double(k, l, v); }},
      {"alpha", [](RunConfig& c, auto& k, int l, auto& v) { c.params.alpha = to_double(k, l, v); }},
      {"lambda",
       [](RunConfig& c, auto& k, int l, auto& v) { c.params.lambda = to_double(k, l, v); }},
      {"beta", [](RunConfig& c, auto& k, int l, auto& v) { c.params.beta = to_double(k, l, v); }},
      {"r", [](RunConfig& c, auto& k, int l, auto& v) { c.params.r = to_double(k, l, v); }},
      {"epsilon",
       [](RunConfig& c, auto& k, int l, auto& v) { c.params.epsilon = to_double(k, l, v); }},
      {"eta_floor",
       [](RunConfig& c, auto& k, int l, auto& v) { c.params.eta_floor = to_double(k, l, v); }},
      {"diffusion_mode",
       [](RunConfig& c, auto& k, int l, auto& v) {
         try {
           c.params.diffusion_mode = diffusion_mode_from_string(v);
         } catch (const ConfigError& e) {
           throw ConfigParseError(k, l, e.what());
         }
       }},
      {"strict_cond_gamma",
       [](RunConfig& c, auto& k, int l, auto& v) { c.params.strict_cond_gamma = to_bool(k, l, v); }},
  };
  return keys;
}

int line_of(const std::map<std::string, int>& seen, const std::string& key) {
  auto it = seen.find(key);
  return it == seen.end() ? 0 : it->second;
}

void validate(const RunConfig& c, const std::map<std::string, int>& seen) {
  auto fail = [&](const std::string& key, const std::string& what) {
    throw ConfigParseError(key, line_of(seen, key), what);
  };
  if (!seen.count("nx")) fail("nx", "required key missing");
  if (!seen.count("t_end")) fail("t_end", "required key missing");

  // Parameter checks run first so that the exponent condition is reported
  // for any stated dimension 1..3.
  try {
    c.params.validate(c.dimension >= 1 && c.dimension <= 3 ? c.dimension : 1);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    std::string key = "params";
    for (const auto& [name, setter] : param_keys()) {
      if (msg.find(name) != std::string::npos && seen.count("params." + name)) {
        key = "params." + name;
        break;
      }
    }
    fail(key, msg);
  }
  if (c.dimension != 1 && c.dimension != 2) fail("dimension", "must be 1 or 2");
  if (c.nx < 4) fail("nx", "must be >= 4");
  if (c.dimension == 2 && c.ny != 0 && c.ny < 4) fail("ny", "must be >= 4");
  if (!(c.lx > 0.0)) fail("lx", "must be > 0");
  if (!(c.ly > 0.0)) fail("ly", "must be > 0");
  if (!(c.t_end > 0.0)) fail("t_end", "must be > 0");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) fail("cfl", "must lie in (0, 1]");
  if (!(c.theta >= 0.0 && c.theta <= 2.0)) fail("theta_limiter", "must lie in [0, 2]");
  if (c.fixed_dt && !(*c.fixed_dt > 0.0)) fail("fixed_dt", "must be > 0");
  if (c.snapshot_every && !(*c.snapshot_every > 0.0)) fail("snapshot_every", "must be > 0");
  for (double t : c.snapshot_times) {
    if (t < 0.0 || t > c.t_end) fail("snapshot_times", "entries must lie in [0, t_end]");
  }
  if (c.levels < 2) fail("levels", "must be >= 2");
  if (c.study != "space" && c.study != "time" && c.study != "both") {
    fail("study", "expected space|time|both");
  }
  if (c.time_steps < 0) fail("time_steps", "must be >= 0");
  if (!(c.linf_ceiling > 0.0)) fail("linf_ceiling", "must be > 0");
  if (!(c.support_threshold > 0.0)) fail("support_threshold", "must be > 0");
  if (c.weak_intervals < 8) fail("weak_intervals", "must be >= 8");
  for (double e : c.eps_list) {
    if (e < 0.0 || e >= 1.0) fail("eps_list", "entries must lie in [0, 1)");
  }
  const InitPreset& in = c.init;
  if (in.kind == InitPreset::Kind::Custom && c.init_file.empty()) {
    fail("init_file", "required for init_preset = custom-file");
  }
  if (in.kind == InitPreset::Kind::GaussBump) {
    if (!(in.amplitude >= 0.0)) fail("amplitude", "must be >= 0");
    if (!(in.sigma_fraction > 0.0)) fail("sigma_fraction", "must be > 0");
  }
  if (!(in.m0 >= 0.0)) fail("m0", "must be >= 0");
  if (!(in.c0 >= 0.0)) fail("c0", "must be >= 0");
  if (!(in.d0 >= 0.0 && in.d0 <= 1.0)) fail("d0", "must lie in [0, 1]");
}

RunConfig parse_impl(const std::string& text, std::map<std::string, int>& seen) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool in_params = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[params]") {
        in_params = true;
        continue;
      }
      throw ConfigParseError(line, line_no, "unknown section (only [params] is allowed)");
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigParseError(line, line_no, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = in_params ? param_keys() : top_level_keys();
    auto it = table.find(key);
    if (it == table.end()) {
      throw ConfigParseError(key, line_no,
                             in_params ? "unknown key in [params]" : "unknown key");
    }
    const std::string full = in_params ? "params." + key : key;
    if (seen.count(full)) throw ConfigParseError(key, line_no, "duplicate key");
    seen[full] = line_no;
    if (value.empty()) throw ConfigParseError(key, line_no, "empty value");
    it->second(c, key, line_no, value);
  }
  return c;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, int> seen;
  RunConfig c = parse_impl(text, seen);
  validate(c, seen);
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("<file>", 0, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse_config_text(buf.str());
  if (c.init.kind == InitPreset::Kind::Custom) {
    std::filesystem::path data = c.init_file;
    if (data.is_relative()) data = path.parent_path() / data;
    SnapshotData snap = read_snapshot(data);
    c.init.custom = CustomFields{snap.m, snap.c, snap.d};
  }
  return c;
}

Grid RunConfig::grid() const {
  return Grid::make(dimension, nx, lx, dimension == 2 ? (ny > 0 ? ny : nx) : 1, ly);
}

std::vector<double> RunConfig::snapshot_instants() const {
  std::vector<double> out = snapshot_times;
  if (out.empty() && snapshot_every) {
    const double h = *snapshot_every;
    const auto n = static_cast<long>(std::floor(t_end / h * (1.0 + 1e-12)));
    for (long k = 0; k <= n; ++k) out.push_back(std::min(k * h, t_end));
  }
  if (out.empty()) out.push_back(t_end);
  return out;
}

AdvanceOptions RunConfig::advance_options() const {
  AdvanceOptions o;
  o.cfl = cfl;
  o.theta = theta;
  o.fixed_dt = fixed_dt;
  o.snapshot_times = snapshot_instants();
  return o;
}

namespace {

std::string list_text(const std::vector<double>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace

std::string echo_config(const RunConfig& c) {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  kv("experiment", c.experiment);
  kv("dimension", std::to_string(c.dimension));
  kv("nx", std::to_string(c.nx));
  kv("ny", std::to_string(c.ny));
  kv("lx", format_double(c.lx));
  kv("ly", format_double(c.ly));
  kv("t_end", format_double(c.t_end));
  kv("cfl", format_double(c.cfl));
  kv("theta_limiter", format_double(c.theta));
  kv("fixed_dt", c.fixed_dt ? format_double(*c.fixed_dt) : "none");
  kv("snapshot_times", list_text(c.snapshot_times));
  kv("snapshot_every", c.snapshot_every ? format_double(*c.snapshot_every) : "none");
  kv("init_preset", preset_name(c.init.kind));
  kv("amplitude", format_double(c.init.amplitude));
  kv("sigma_fraction", format_double(c.init.sigma_fraction));
  kv("center_x", format_double(c.init.center_x));
  kv("center_y", format_double(c.init.center_y));
  kv("m0", format_double(c.init.m0));
  kv("c0", format_double(c.init.c0));
  kv("d0", format_double(c.init.d0));
  if (!c.init_file.empty()) kv("init_file", c.init_file);
  kv("output_dir", c.output_dir);
  kv("levels", std::to_string(c.levels));
  kv("study", c.study);
  kv("time_steps", std::to_string(c.time_steps));
  kv("linf_ceiling", format_double(c.linf_ceiling));
  kv("support_threshold", format_double(c.support_threshold));
  kv("weak_intervals", std::to_string(c.weak_intervals));
  kv("eps_list", list_text(c.eps_list));
  os << "[params]\n";
  const ModelParams& p = c.params;
  kv("gamma", format_double(p.gamma));
  kv("chi", format_double(p.chi));
  kv("mu", format_double(p.mu));
  kv("delta", format_double(p.delta));
  kv("tau", format_double(p.tau));
  kv("alpha", format_double(p.alpha));
  kv("lambda", format_double(p.lambda));
  kv("beta", format_double(p.beta));
  kv("r", format_double(p.r));
  kv("epsilon", format_double(p.epsilon));
  kv("eta_floor", format_double(p.eta_floor));
  kv("diffusion_mode", std::string(to_string(p.diffusion_mode)));
  kv("strict_cond_gamma", p.strict_cond_gamma ? "true" : "false");
  return os.str();
}

std::string config_digest(const RunConfig& c) {
  const std::string text = echo_config(c);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> parse_number_list(const std::string& text) {
  return to_list("list", 0, text);
}

}  // namespace balo
