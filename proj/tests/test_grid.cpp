#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "balo/errors.hpp"
#include "balo/grid.hpp"

using namespace balo;

TEST_CASE("grid geometry") {
  const Grid g = Grid::make(1, 10, 2.0);
  CHECK(g.dx == doctest::Approx(0.2));
  CHECK(g.size() == 14);
  CHECK(g.x_center(0) == doctest::Approx(0.1));
  CHECK(g.x_center(9) == doctest::Approx(1.9));
  CHECK(g.index(0) == 2);
  const Grid g2 = Grid::make(2, 4, 1.0, 6, 3.0);
  CHECK(g2.dy == doctest::Approx(0.5));
  CHECK(g2.size() == 8u * 10u);
  CHECK(g2.index(0, 0) == 2u * 8u + 2u);
  CHECK_THROWS(Grid::make(1, 3, 1.0));
  CHECK_THROWS(Grid::make(1, 8, -1.0));
  CHECK_THROWS(Grid::make(2, 8, 1.0, 2, 1.0));
}

TEST_CASE("1D mirror ghosts") {
  const Grid g = Grid::make(1, 4, 1.0);
  std::vector<double> f = {-9, -9, 1, 2, 3, 4, -9, -9};
  fill_ghost_neumann(f, g);
  CHECK(f == std::vector<double>{2, 1, 1, 2, 3, 4, 4, 3});
}

TEST_CASE("uniform field stays uniform") {
  const Grid g = Grid::make(2, 5, 1.0, 4, 1.0);
  std::vector<double> f(g.size(), 0.0);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 5; ++i) f[g.index(i, j)] = 3.5;
  fill_ghost_neumann(f, g);
  for (double v : f) CHECK(v == 3.5);
}

TEST_CASE("2D corner ghosts take the diagonal mirror") {
  const Grid g = Grid::make(2, 4, 1.0, 4, 1.0);
  std::vector<double> f(g.size(), -1.0);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) f[g.index(i, j)] = 10.0 * j + i;
  fill_ghost_neumann(f, g);
  auto mirror = [](int k) { return k < 0 ? -k - 1 : (k >= 4 ? 7 - k : k); };
  for (int j = -2; j < 6; ++j) {
    for (int i = -2; i < 6; ++i) {
      CHECK(f[g.index(i, j)] == 10.0 * mirror(j) + mirror(i));
    }
  }
  // corner by hand: ghost (-1, -1) mirrors (0, 0); (-2, 5) mirrors (1, 2)
  CHECK(f[g.index(-1, -1)] == 0.0);
  CHECK(f[g.index(-2, 5)] == 21.0);
}

TEST_CASE("ghost fill is idempotent and makes boundary differences vanish") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid g = Grid::make(2, 6, 1.0, 5, 1.0);
  std::vector<double> f(g.size());
  for (double& v : f) v = u(rng);
  fill_ghost_neumann(f, g);
  const auto once = f;
  fill_ghost_neumann(f, g);
  CHECK(f == once);
  for (int j = 0; j < 5; ++j) {
    CHECK(f[g.index(-1, j)] - f[g.index(0, j)] == 0.0);
    CHECK(f[g.index(6, j)] - f[g.index(5, j)] == 0.0);
  }
  for (int i = 0; i < 6; ++i) {
    CHECK(f[g.index(i, -1)] - f[g.index(i, 0)] == 0.0);
    CHECK(f[g.index(i, 5)] - f[g.index(i, 4)] == 0.0);
  }
}

TEST_CASE("integrals and norms") {
  const Grid g = Grid::make(1, 10, 2.0);
  std::vector<double> one(g.size(), 1.0);
  CHECK(integrate_field(one, g) == doctest::Approx(2.0).epsilon(1e-15));
  std::vector<double> zero(g.size(), 0.0);
  CHECK(integrate_field(zero, g) == 0.0);

  const Grid g4 = Grid::make(1, 4, 2.0);
  std::vector<double> f = {100, 100, 1, 2, 3, 4, 100, 100};
  CHECK(integrate_field(f, g4) == 5.0);

  const Grid g5 = Grid::make(1, 4, 1.0);
  std::vector<double> h = {9, 9, -1, 2, -3, 0, 9, 9};
  CHECK(linf_norm(h, g5) == 3.0);

  std::vector<double> bad(3, 0.0);
  CHECK_THROWS_AS(integrate_field(bad, g5), ShapeError);
}

TEST_CASE("integral is linear and permutation invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid g = Grid::make(1, 16, 1.0);
  std::vector<double> a(g.size()), b(g.size()), s(g.size());
  for (std::size_t q = 0; q < a.size(); ++q) {
    a[q] = u(rng);
    b[q] = u(rng);
    s[q] = 2.0 * a[q] + b[q];
  }
  CHECK(integrate_field(s, g) ==
        doctest::Approx(2.0 * integrate_field(a, g) + integrate_field(b, g)).epsilon(1e-14));
  auto p = a;
  std::reverse(p.begin() + 2, p.begin() + 18);
  CHECK(integrate_field(p, g) == doctest::Approx(integrate_field(a, g)).epsilon(1e-14));
}

TEST_CASE("presets") {
  const Grid g = Grid::make(1, 101, 1.0);
  InitPreset zero;
  zero.kind = InitPreset::Kind::Zero;
  const State z = allocate_state(g, zero);
  for (double v : z.m) CHECK(v == 0.0);
  for (double v : z.d) CHECK(v == 0.0);

  InitPreset bump;  // A = 1, sigma = 0.05 lx, centred
  const State b = allocate_state(g, bump);
  // odd nx: the middle cell centre sits on the bump centre
  CHECK(b.m[g.index(50)] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(linf_norm(b.m, g) == b.m[g.index(50)]);
  const double x = g.x_center(40) - 0.5;
  CHECK(b.m[g.index(40)] == doctest::Approx(std::exp(-x * x / (2 * 0.05 * 0.05))).epsilon(1e-13));

  InitPreset uni;
  uni.kind = InitPreset::Kind::Uniform;
  uni.m0 = 1.0;
  uni.c0 = 2.0;
  uni.d0 = 1.0;
  const State s = allocate_state(g, uni);
  CHECK(s.c[0] == 2.0);
  uni.d0 = 1.5;
  CHECK_THROWS(allocate_state(g, uni));
  uni.d0 = 0.5;
  uni.m0 = -1.0;
  CHECK_THROWS(allocate_state(g, uni));
}

TEST_CASE("shape check") {
  const Grid g = Grid::make(1, 4, 1.0);
  State s;
  s.m.assign(g.size(), 0.0);
  s.c.assign(g.size(), 0.0);
  s.d.assign(3, 0.0);
  CHECK_THROWS_AS(check_shape(s, g), ShapeError);
  CHECK_THROWS_AS(fill_ghost_neumann(s, g), ShapeError);
}
