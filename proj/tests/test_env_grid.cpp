#include <doctest.h>

#include <cmath>

#include "selfheal/env_grid.hpp"
#include "selfheal/errors.hpp"

using namespace selfheal;

namespace {

GridConfig quiet() {
  GridConfig c;
  c.wear_sigma = 0.0;
  return c;
}

// Independent stencil with explicit mirrored ghosts, used as the oracle.
double oracle_laplacian(const DamageField& f, int i, int j) {
  const int n = static_cast<int>(f.n());
  auto at = [&](int r, int c) {
    r = r < 0 ? 0 : (r >= n ? n - 1 : r);
    c = c < 0 ? 0 : (c >= n ? n - 1 : c);
    return f(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  return at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j);
}

DamageField random_field(std::size_t n, Rng& rng) {
  DamageField f(n);
  for (auto& v : f.cells()) v = uniform(rng, 0.0, 1.0);
  return f;
}

}  // namespace

TEST_CASE("laplacian stencil cases") {
  const auto flat = laplacian(DamageField(6, 0.37));
  for (double v : flat.cells()) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));

  DamageField spike(7);
  spike(3, 4) = 1.0;
  const auto s = laplacian(spike);
  CHECK(s(3, 4) == 4.0);
  CHECK(s(2, 4) == 1.0);
  CHECK(s(4, 4) == 1.0);
  CHECK(s(3, 3) == 1.0);
  CHECK(s(3, 5) == 1.0);
  double rest = 0.0;
  for (double v : s.cells()) rest += v;
  CHECK(rest == 8.0);

  DamageField corner(5);
  corner(0, 0) = 1.0;
  CHECK(laplacian(corner)(0, 0) == 2.0);
}

TEST_CASE("laplacian matches the ghost-cell oracle and is linear") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_field(8, rng);
    const auto g = random_field(8, rng);
    const auto lf = laplacian_signed(f);
    const auto lg = laplacian_signed(g);
    DamageField combo(8);
    for (std::size_t k = 0; k < combo.cells().size(); ++k) combo.cells()[k] = 0.3 * f.cells()[k] + 0.6 * g.cells()[k];
    const auto lc = laplacian_signed(combo);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
        REQUIRE(lf(ui, uj) == doctest::Approx(oracle_laplacian(f, i, j)).epsilon(1e-12));
        REQUIRE(lc(ui, uj) == doctest::Approx(0.3 * lf(ui, uj) + 0.6 * lg(ui, uj)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("grid_step examples") {
  Rng rng(1);
  SUBCASE("zero field stays zero without wear") {
    DamageField f(16);
    grid_step(quiet(), f, std::nullopt, rng);
    for (double v : f.cells()) CHECK(v == 0.0);
  }
  SUBCASE("single defect grows by g * stress") {
    GridConfig c = quiet();
    DamageField f(9);
    f(4, 4) = 0.4;
    grid_step(c, f, std::nullopt, rng);
    CHECK(f(4, 4) == doctest::Approx(0.56));
    CHECK(f(3, 4) == doctest::Approx(0.04));
    CHECK(f(5, 4) == doctest::Approx(0.04));
    CHECK(f(4, 3) == doctest::Approx(0.04));
    CHECK(f(4, 5) == doctest::Approx(0.04));
    CHECK(f(3, 3) == 0.0);
  }
  SUBCASE("dosage 1 removes exactly A at the target before clamping") {
    GridConfig c = quiet();
    DamageField f(9, 0.8);  // uniform: no growth
    grid_step(c, f, GridAction{2, 6, 1.0}, rng);
    CHECK(f(2, 6) == doctest::Approx(0.8 - c.heal_amplitude));
    const double d1 = 0.8 - f(2, 7);
    const double d2 = 0.8 - f(2, 8);
    CHECK(d1 == doctest::Approx(c.heal_amplitude * std::exp(-1.0 / (2.0 * 1.5 * 1.5))));
    CHECK(d2 < d1);
  }
  SUBCASE("out-of-range actions are rejected") {
    DamageField f(9);
    CHECK_THROWS_AS(grid_step(quiet(), f, GridAction{9, 0, 1.0}, rng), std::out_of_range);
  }
}

TEST_CASE("uniform field without wear is a fixed point") {
  GridConfig c = quiet();
  DamageField f(16, 0.2);
  Rng rng(2);
  for (int t = 0; t < 50; ++t) grid_step(c, f, std::nullopt, rng);
  for (double v : f.cells()) CHECK(v == 0.2);
}

TEST_CASE("healing locality") {
  GridConfig c = quiet();
  Rng rng(8);
  DamageField f(12, 0.6);
  DamageField before = f;
  grid_step(c, f, GridAction{5, 5, 0.7}, rng);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) CHECK(f(i, j) <= before(i, j));
  }
  for (std::size_t j = 5; j + 1 < 12; ++j) CHECK(before(5, j) - f(5, j) >= before(5, j + 1) - f(5, j + 1));
}

TEST_CASE("fuzz: cells stay in [0,1]") {
  Rng rng(11);
  GridConfig c;
  c.wear_sigma = 0.05;
  for (int ep = 0; ep < 200; ++ep) {
    DamageField f = random_field(8, rng);
    for (int t = 0; t < 30; ++t) {
      std::optional<GridAction> a;
      if (t % 2 == 0) a = GridAction{uniform_index(rng, 8), uniform_index(rng, 8), uniform(rng, 0.0, 1.0)};
      const double integrity = grid_step(c, f, a, rng);
      for (double v : f.cells()) REQUIRE((v >= 0.0 && v <= 1.0));
      REQUIRE(integrity == doctest::Approx(1.0 - f.mean()).epsilon(1e-15));
    }
  }
}

TEST_CASE("observe noise model") {
  Rng rng(4);
  DamageField f(4, 0.3);
  CHECK(observe(f, 0.0, rng) == f);
  DamageField edge(4, 0.0);
  edge(0, 0) = 1.0;
  const auto o = observe(edge, 0.5, rng);
  for (double v : o.cells()) CHECK((v >= 0.0 && v <= 1.0));

  DamageField half(1 * 3, 0.5);
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const double v = observe(half, 0.02, rng)(1, 1);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  CHECK(std::abs(sd - 0.02) < 0.002);
}

TEST_CASE("heatmap export and parse") {
  CHECK(export_heatmap(DamageField(2)) == "0.00000,0.00000\n0.00000,0.00000\n");
  DamageField f(2);
  f(0, 1) = 0.5;
  CHECK(export_heatmap(f).substr(0, 16) == "0.00000,0.50000\n");

  Rng rng(6);
  const auto g = random_field(5, rng);
  const auto back = parse_heatmap(export_heatmap(g));
  REQUIRE(back.n() == 5);
  for (std::size_t k = 0; k < g.cells().size(); ++k) CHECK(std::abs(back.cells()[k] - g.cells()[k]) <= 5e-6);
}

TEST_CASE("initial field reaches the target integrity") {
  GridConfig c;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GridEnv env(c);
    env.reset(seed);
    CHECK(std::abs(env.integrity() - 0.91) <= 0.002);
    CHECK(env.true_field().center_mean() > 0.2);
  }
}

TEST_CASE("grid env protocol") {
  GridConfig c;
  c.horizon = 3;
  GridEnv env(c);
  env.reset(1);
  for (int t = 0; t < 3; ++t) env.step(std::nullopt);
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(std::nullopt), ProtocolError);
  GridConfig bad;
  bad.n = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
