#include <doctest.h>

#include <fstream>

#include "balo/config.hpp"
#include "balo/errors.hpp"
#include "tmpdir.hpp"

using namespace balo;

TEST_CASE("minimal file takes the documented defaults") {
  const RunConfig c = parse_config_text("dimension = 1\nnx = 100\nlx = 1\nt_end = 1\n");
  CHECK(c.cfl == 0.25);
  CHECK(c.theta == 1.5);
  CHECK(c.params.chi == 4.0);
  CHECK(c.params.gamma == 2.0);
  CHECK(c.params.delta == 1.0);
  CHECK(c.params.mu == 1.0);
  CHECK(c.params.epsilon == 0.0);
  CHECK(c.params.tau == 1.0);
  CHECK(c.params.alpha == 1.0);
  CHECK(c.params.diffusion_mode == DiffusionMode::PorousMedium);
  CHECK(c.init.kind == InitPreset::Kind::GaussBump);
  CHECK(c.snapshot_instants() == std::vector<double>{1.0});
}

TEST_CASE("parsed values, comments and lists") {
  const RunConfig c = parse_config_text(
      "# header\nexperiment = demo\ndimension = 2\nnx = 32  # trailing\nny = 16\nlx = 2\nly = 1\n"
      "t_end = 0.5\nsnapshot_times = 0.1, 0.25,0.5\ninit_preset = uniform\nm0 = 0.5\n"
      "[params]\ndiffusion_mode = linear\nchi = 10\n");
  CHECK(c.experiment == "demo");
  CHECK(c.grid().ny == 16);
  CHECK(c.grid().dx == doctest::Approx(1.0 / 16));
  CHECK(c.snapshot_times == std::vector<double>{0.1, 0.25, 0.5});
  CHECK(c.init.kind == InitPreset::Kind::Uniform);
  CHECK(c.params.diffusion_mode == DiffusionMode::Linear);
  CHECK(c.params.chi == 10.0);
}

namespace {
ConfigParseError parse_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ConfigParseError("", 0, "");
}
}  // namespace

TEST_CASE("errors name the key and line") {
  auto e = parse_error("nx = 10\nt_end = 1\nnxx = 3\n");
  CHECK(e.key() == "nxx");
  CHECK(e.line() == 3);

  e = parse_error("nx = ten\nt_end = 1\n");
  CHECK(e.key() == "nx");
  CHECK(e.line() == 1);

  e = parse_error("nx = 10\nt_end = 1\n[params]\ngamma = 1\n");
  CHECK(e.key() == "params.gamma");
  CHECK(e.line() == 4);

  e = parse_error("nx = 10\nt_end = 1\ncfl = 2\n");
  CHECK(e.key() == "cfl");

  e = parse_error("nx = 10\n");
  CHECK(e.key() == "t_end");

  e = parse_error("nx = 10\nt_end = 1\nnx = 20\n");
  CHECK(e.line() == 3);

  e = parse_error("nx = 10\nt_end = 1\n[other]\n");
  CHECK(e.line() == 3);

  e = parse_error("nx = 10\nt_end = 1\nsnapshot_times = 0.5, 2\n");
  CHECK(e.key() == "snapshot_times");

  // threshold is 1 in one and two dimensions, so only gamma <= 1 trips it there
  CHECK_NOTHROW(parse_config_text("nx = 10\nt_end = 1\n[params]\ngamma = 1.2\nstrict_cond_gamma = true\n"));
}

TEST_CASE("exponent condition in three dimensions") {
  ModelParams p;
  p.gamma = 1.2;
  p.strict_cond_gamma = true;
  CHECK_THROWS_AS(p.validate(3), ConfigError);
  p.gamma = 1.4;
  CHECK_NOTHROW(p.validate(3));
}

TEST_CASE("echo round-trips") {
  const RunConfig c = parse_config_text(
      "experiment = e\ndimension = 2\nnx = 8\nt_end = 0.3\nsnapshot_every = 0.1\namplitude = 0.7\n"
      "eps_list = 0.1, 0\n[params]\nchi = 3.3\nepsilon = 0.01\n");
  const std::string echo = echo_config(c);
  const RunConfig back = parse_config_text(echo);
  CHECK(echo_config(back) == echo);
  CHECK(config_digest(back) == config_digest(c));
  CHECK(config_digest(c).size() == 16);
  RunConfig other = c;
  other.params.chi = 3.4;
  CHECK(config_digest(other) != config_digest(c));
}

TEST_CASE("snapshot_every instants") {
  const RunConfig c = parse_config_text("nx = 8\nt_end = 0.3\nsnapshot_every = 0.1\n");
  const auto t = c.snapshot_instants();
  REQUIRE(t.size() == 4);
  CHECK(t[0] == 0.0);
  CHECK(t[3] == 0.3);
}

TEST_CASE("number lists and formatting") {
  CHECK(parse_number_list("1e-1, 2 ,3") == std::vector<double>{0.1, 2.0, 3.0});
  CHECK_THROWS(parse_number_list("1, x"));
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_short(0.1) == "0.1");
}

TEST_CASE("file errors") {
  TempDir tmp;
  CHECK_THROWS_AS(parse_config(tmp.path / "missing.conf"), ConfigParseError);
  std::ofstream(tmp.path / "a.conf") << "nx = 8\nt_end = 1\ninit_preset = custom-file\n";
  CHECK_THROWS(parse_config(tmp.path / "a.conf"));
}
