#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "balo/cli.hpp"
#include "balo/errors.hpp"
#include "balo/snapshot.hpp"
#include "tmpdir.hpp"

using namespace balo;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "balo_fv");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return cli_main(static_cast<int>(args.size()), argv.data());
}

std::filesystem::path write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("run on the fixed point keeps the state") {
  TempDir tmp;
  const auto cfg = write(tmp.path / "fp.conf",
                         "experiment = fp\nnx = 8\nt_end = 0.05\ninit_preset = uniform\nm0 = 1\n"
                         "c0 = 2\nd0 = 1\nsnapshot_times = 0, 0.05\n");
  const auto out = tmp.path / "out";
  CHECK(run_cli({"run", cfg.string(), "--output-dir", out.string(), "--quiet"}) == kExitPass);
  const SnapshotData first = read_snapshot(out / "snapshots" / "fp_0.csv");
  const SnapshotData last = read_snapshot(out / "snapshots" / "fp_1.csv");
  CHECK(last.t == 0.05);
  CHECK(first.m == last.m);
  CHECK(first.c == last.c);
  CHECK(first.d == last.d);
  CHECK(slurp(out / "run.report").find("result: PASS") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  TempDir tmp;
  CHECK(run_cli({"frobnicate"}) == kExitUsage);
  CHECK(run_cli({}) == kExitUsage);
  CHECK(run_cli({"run"}) == kExitUsage);
  CHECK(run_cli({"run", (tmp.path / "missing.conf").string(), "--quiet"}) == kExitUsage);
  const auto bad = write(tmp.path / "bad.conf", "nx = 8\nt_end = 1\nbogus = 1\n");
  CHECK(run_cli({"audit", bad.string(), "--quiet"}) == kExitUsage);
  const auto ok = write(tmp.path / "ok.conf", "nx = 8\nt_end = 0.01\n");
  CHECK(run_cli({"converge", ok.string(), "--levels", "2", "--quiet", "--output-dir",
                 tmp.path.string()}) == kExitUsage);
  CHECK(run_cli({"eps-sweep", ok.string(), "--eps", "0.1,x", "--quiet"}) == kExitUsage);
  CHECK(run_cli({"--threads", "0", "run", ok.string()}) == kExitUsage);
}

TEST_CASE("audit with the logistic term off reports the drift") {
  TempDir tmp;
  const auto cfg =
      write(tmp.path / "m.conf", "experiment = m\nnx = 64\nt_end = 0.02\n[params]\nmu = 0\n");
  const auto out = tmp.path / "o";
  CHECK(run_cli({"audit", cfg.string(), "--output-dir", out.string(), "--quiet"}) == kExitPass);
  const std::string rep = slurp(out / "audit.report");
  CHECK(rep.find("metric: mass_drift_relative, ") != std::string::npos);
  CHECK(rep.find("<= 1e-10, PASS") != std::string::npos);
}

TEST_CASE("metric failure exits 1") {
  TempDir tmp;
  // a ceiling below the initial peak forces a failed boundedness metric
  const auto cfg = write(tmp.path / "f.conf", "nx = 16\nt_end = 0.001\nlinf_ceiling = 0.5\n");
  CHECK(run_cli({"audit", cfg.string(), "--output-dir", tmp.path.string(), "--quiet"}) ==
        kExitMetricFailure);
  CHECK(slurp(tmp.path / "audit.report").find("result: FAIL") != std::string::npos);
}

TEST_CASE("global flags after the subcommand") {
  TempDir tmp;
  const auto cfg = write(tmp.path / "g.conf", "nx = 8\nt_end = 0.001\n");
  CHECK(run_cli({"run", cfg.string(), "--quiet", "--threads", "2", "--output-dir",
                 (tmp.path / "x").string()}) == kExitPass);
  CHECK(std::filesystem::exists(tmp.path / "x" / "run.report"));
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  ::setenv("BALO_FV_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5);
  ::setenv("BALO_FV_THREADS", "five", 1);
  CHECK_THROWS_AS(resolve_threads(0), ConfigError);
  ::unsetenv("BALO_FV_THREADS");
  CHECK(resolve_threads(0) >= 1);
}
