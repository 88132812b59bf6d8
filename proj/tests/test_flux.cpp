#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "balo/errors.hpp"
#include "balo/flux.hpp"
#include "balo/integrator.hpp"

using namespace balo;

namespace {
State make_1d(const Grid& g, const std::vector<double>& m, const std::vector<double>& c,
              const std::vector<double>& d) {
  State s;
  s.m.assign(g.size(), 0.0);
  s.c.assign(g.size(), 0.0);
  s.d.assign(g.size(), 0.0);
  for (int i = 0; i < g.nx; ++i) {
    s.m[g.index(i)] = m[i];
    s.c[g.index(i)] = c[i];
    s.d[g.index(i)] = d[i];
  }
  fill_ghost_neumann(s, g);
  return s;
}
}  // namespace

TEST_CASE("minmod") {
  const double a[] = {0.3, 0.2, 0.5};
  const double b[] = {-0.3, -0.2, -0.5};
  const double c[] = {0.3, -0.2, 0.5};
  const double z[] = {0.3, 0.0, 0.5};
  CHECK(minmod(a) == 0.2);
  CHECK(minmod(b) == -0.2);
  CHECK(minmod(c) == 0.0);
  CHECK(minmod(z) == 0.0);
  CHECK(minmod3(0.3, 0.2, 0.5) == 0.2);
  CHECK(minmod3(-0.3, -0.2, -0.5) == -0.2);
  CHECK(minmod3(0.3, -0.2, 0.5) == 0.0);
}

TEST_CASE("branch-free minmod agrees with the list form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double v[] = {u(rng), u(rng), u(rng)};
    REQUIRE(minmod3(v[0], v[1], v[2]) == minmod(v));
  }
}

TEST_CASE("limited slope") {
  CHECK(limited_slope(1, 2, 3, 1.0, 1.0) == 1.0);
  CHECK(limited_slope(1, 3, 2, 1.0, 1.0) == 0.0);
  CHECK(limited_slope(0, 1, 4, 1.0, 2.0) == 2.0);
  CHECK(limited_slope(0, 1, 4, 1.0, 0.0) == 0.0);
}

TEST_CASE("velocity") {
  ModelParams p;
  CHECK(velocity_m(0.7, 0.7, 0.0, 0.1, p) == 0.0);
  CHECK(velocity_m(0.5, 1.0, 0.0, 0.1, p) == doctest::Approx(-10.0).epsilon(1e-14));
  p.chi = 4.0;
  CHECK(velocity_m(1.0, 1.0, 0.5, 0.1, p) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("upwind macrophage flux") {
  CHECK(flux_m(1.0, 0.7, 0.2, 0.0, 0.0, 0.1) == 0.7);
  CHECK(flux_m(-1.0, 0.7, 0.4, 0.0, 0.0, 0.1) == -0.4);
  CHECK(flux_m(0.0, 0.7, 0.4, 3.0, -2.0, 0.1) == 0.0);
  // reconstructed endpoints: 0.7 + 0.05*2, 0.4 - 0.05*(-2)
  CHECK(flux_m(2.0, 0.7, 0.4, 2.0, -2.0, 0.1) == doctest::Approx(1.6));
  CHECK(flux_m(-2.0, 0.7, 0.4, 2.0, -2.0, 0.1) == doctest::Approx(-1.0));
  // negative reconstruction clamps to zero
  CHECK(flux_m(1.0, 0.01, 0.4, -1.0, 0.0, 0.1) == 0.0);
}

TEST_CASE("cytokine flux") {
  ModelParams p;
  CHECK(flux_c(1.0, 1.0, 0.5, p) == 0.0);
  CHECK(flux_c(1.0, 2.0, 0.5, p) == -2.0);
  CHECK(flux_c(2.0, 1.0, 0.5, p) == 2.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(rng), b = u(rng);
    REQUIRE(flux_c(a, b, 0.1, p) == -flux_c(b, a, 0.1, p));
  }
}

TEST_CASE("uniform state gives zero fluxes") {
  const Grid g = Grid::make(2, 6, 1.0, 5, 1.0);
  InitPreset in;
  in.kind = InitPreset::Kind::Uniform;
  in.m0 = 1.0;
  in.c0 = 2.0;
  in.d0 = 1.0;
  const FluxSet fs = compute_fluxes(allocate_state(g, in), g, ModelParams{}, 1.5);
  for (int a = 0; a < 2; ++a) {
    for (double v : fs.dir[a].f_m) CHECK(v == 0.0);
    for (double v : fs.dir[a].f_c) CHECK(v == 0.0);
  }
  CHECK(fs.max_abs_velocity == 0.0);
}

TEST_CASE("face array shapes and zero boundary faces") {
  const Grid g = Grid::make(2, 6, 1.0, 5, 1.0);
  const State s = allocate_state(g, InitPreset{});
  const FluxSet fs = compute_fluxes(s, g, ModelParams{}, 1.5);
  CHECK(fs.dir[0].lines == 5);
  CHECK(fs.dir[0].cells_per_line == 6);
  CHECK(fs.dir[0].f_m.size() == 5u * 7u);
  CHECK(fs.dir[1].lines == 6);
  CHECK(fs.dir[1].f_m.size() == 6u * 6u);
  for (int a = 0; a < 2; ++a) {
    const auto& d = fs.dir[a];
    for (int l = 0; l < d.lines; ++l) {
      CHECK(d.f_m[d.face(l, 0)] == 0.0);
      CHECK(d.f_m[d.face(l, d.cells_per_line)] == 0.0);
      CHECK(d.f_c[d.face(l, 0)] == 0.0);
      CHECK(d.f_c[d.face(l, d.cells_per_line)] == 0.0);
    }
  }
}

TEST_CASE("theta = 0 is first-order upwind") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const Grid g = Grid::make(1, 8, 1.0);
  ModelParams p;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> m(8), c(8), d(8, 0.0);
    for (int i = 0; i < 8; ++i) {
      m[i] = u(rng);
      c[i] = u(rng);
    }
    const FluxSet fs = compute_fluxes(make_1d(g, m, c, d), g, p, 0.0);
    for (double s : fs.s_m[0]) REQUIRE(s == 0.0);
    for (int k = 1; k < 8; ++k) {
      const double v = -(diffusion_enthalpy(m[k], p) - diffusion_enthalpy(m[k - 1], p)) / g.dx;
      const double up = v > 0 ? v * m[k - 1] : v * m[k];
      REQUIRE(fs.dir[0].f_m[k] == doctest::Approx(up).epsilon(1e-14));
    }
  }
}

TEST_CASE("reconstruction creates no new extrema") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid g = Grid::make(1, 16, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> m(16), c(16), d(16, 0.0);
    const bool monotone = trial % 2 == 0;
    double acc = 0.0;
    for (int i = 0; i < 16; ++i) {
      acc += u(rng);
      m[i] = monotone ? acc : u(rng);
      c[i] = 0.0;
    }
    for (double theta : {1.0, 1.5, 2.0}) {
      const FluxSet fs = compute_fluxes(make_1d(g, m, c, d), g, ModelParams{}, theta);
      for (int i = 0; i < 15; ++i) {
        const double lo = std::min(m[i], m[i + 1]), hi = std::max(m[i], m[i + 1]);
        const double east = m[i] + 0.5 * g.dx * fs.s_m[0][g.index(i)];
        const double west = m[i + 1] - 0.5 * g.dx * fs.s_m[0][g.index(i + 1)];
        REQUIRE(east >= lo - 1e-15);
        REQUIRE(east <= hi + 1e-15);
        REQUIRE(west >= lo - 1e-15);
        REQUIRE(west <= hi + 1e-15);
      }
    }
  }
}

TEST_CASE("transport conserves mass when the logistic term is off") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid g = Grid::make(2, 12, 1.0, 10, 1.0);
  ModelParams p;
  p.mu = 0.0;
  State s = allocate_state(g, InitPreset{});
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 12; ++i) {
      s.m[g.index(i, j)] = u(rng);
      s.c[g.index(i, j)] = u(rng);
    }
  const StateDerivative k = rhs(s, g, p, 1.5);
  double total = 0.0, scale = 0.0;
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 12; ++i) {
      total += k.m[g.index(i, j)];
      scale += std::abs(k.m[g.index(i, j)]);
    }
  CHECK(std::abs(total) <= 1e-14 * scale);
}

TEST_CASE("non-finite input is reported") {
  const Grid g = Grid::make(1, 8, 1.0);
  State s = allocate_state(g, InitPreset{});
  s.c[g.index(3)] = std::nan("");
  CHECK_THROWS_AS(compute_fluxes(s, g, ModelParams{}, 1.5), NumericalError);
  State t = allocate_state(g, InitPreset{});
  t.m[g.index(3)] = -0.5;
  CHECK_THROWS_AS(compute_fluxes(t, g, ModelParams{}, 1.5), DomainError);
}
