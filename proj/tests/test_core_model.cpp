#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "driftinv/core_model.hpp"
#include "driftinv/errors.hpp"
#include "driftinv/experiment.hpp"

using namespace driftinv;

TEST_CASE("build_grids matches the example grid sizes") {
  const GridPair a = build_grids(100, 100, 1.0);
  CHECK(a.space.spacing() == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(a.time.step() == doctest::Approx(0.01).epsilon(1e-15));

  const GridPair b = build_grids(20, 80, 1.0);
  CHECK(b.space.spacing() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(b.time.step() == doctest::Approx(0.0125).epsilon(1e-15));

  const GridPair c = build_grids(4, 1, 1.0);
  const std::vector<double> expected{0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK(c.space.nodes() == expected);
}

TEST_CASE("grid consistency h*m = 1 and tau*N = T") {
  for (int m : {3, 7, 20, 100, 333, 1000}) {
    for (int n : {1, 13, 80, 1000}) {
      for (double T : {0.5, 1.0, 3.7}) {
        const GridPair g = build_grids(m, n, T);
        CHECK(std::abs(g.space.spacing() * m - 1.0) <= 1e-14);
        CHECK(std::abs(g.time.step() * n - T) <= 1e-14 * T);
        CHECK(g.time.time(n) == T);
        const auto nodes = g.space.nodes();
        CHECK(nodes.front() == 0.0);
        CHECK(nodes.back() == 1.0);
        for (std::size_t i = 1; i < nodes.size(); ++i) CHECK(nodes[i] > nodes[i - 1]);
      }
    }
  }
}

TEST_CASE("build_grids rejects invalid sizes and names the field") {
  auto message = [](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message([] { build_grids(2, 10, 1.0); }).find("grid-m") != std::string::npos);
  CHECK(message([] { build_grids(10, 0, 1.0); }).find("grid-n") != std::string::npos);
  CHECK(message([] { build_grids(10, 10, 0.0); }).find("horizon") != std::string::npos);
  CHECK(message([] { build_grids(10, 10, -1.0); }).find("horizon") != std::string::npos);
}

TEST_CASE("stencil examples") {
  SUBCASE("second difference of a linear function vanishes") {
    const SpatialGrid g(4);
    const GridFunction u = GridFunction::sample(g, [](double x) { return x; });
    const GridFunction d2 = apply_stencil(Stencil::DeltaX2, u);
    for (std::size_t i = 0; i < d2.size(); ++i) CHECK(std::abs(d2[i]) <= 1e-12);
  }
  SUBCASE("centred difference of x^2 is 2x inside, zero at the ends") {
    const SpatialGrid g(10);
    const GridFunction u = GridFunction::sample(g, [](double x) { return x * x; });
    const GridFunction d = apply_stencil(Stencil::DeltaX, u);
    CHECK(d[0] == 0.0);
    CHECK(d[10] == 0.0);
    for (std::size_t i = 1; i < 10; ++i) CHECK(d[i] == doctest::Approx(2.0 * g.node(i)).epsilon(1e-12));
  }
  SUBCASE("L on a constant") {
    const SpatialGrid g(4);
    const GridFunction u(g, 1.0);
    const GridFunction l = apply_stencil(Stencil::L, u, 0.5);
    const std::vector<double> expected{0.0, 2.0, 2.0, 2.0, 0.0};
    for (std::size_t i = 0; i < 5; ++i) CHECK(l[i] == doctest::Approx(expected[i]));
  }
  SUBCASE("identity stencil zeroes the ends") {
    const SpatialGrid g(5);
    const GridFunction u = GridFunction::sample(g, [](double x) { return 1.0 + x; });
    const GridFunction iu = apply_stencil(Stencil::I, u);
    CHECK(iu[0] == 0.0);
    CHECK(iu[5] == 0.0);
    for (std::size_t i = 1; i < 5; ++i) CHECK(iu[i] == u[i]);
  }
  SUBCASE("L needs a positive time step") {
    const SpatialGrid g(4);
    CHECK_THROWS_AS(apply_stencil(Stencil::L, GridFunction(g, 1.0), 0.0), ConfigError);
  }
}

TEST_CASE("stencils annihilate constants and are exact on quadratics") {
  for (int m : {3, 10, 64, 500}) {
    const SpatialGrid g(m);
    const GridFunction c(g, 3.25);
    for (Stencil s : {Stencil::DeltaX, Stencil::DeltaX2}) {
      const GridFunction r = apply_stencil(s, c);
      for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == 0.0);
    }
    const GridFunction quad = GridFunction::sample(g, [](double x) { return 1.0 - 2.0 * x + 3.0 * x * x; });
    const GridFunction d1 = apply_stencil(Stencil::DeltaX, quad);
    const GridFunction d2 = apply_stencil(Stencil::DeltaX2, quad);
    for (std::size_t i = 1; i + 1 < quad.size(); ++i) {
      const double x = g.node(i);
      CHECK(std::abs(d1[i] - (-2.0 + 6.0 * x)) <= 1e-12 * std::max(1.0, std::abs(-2.0 + 6.0 * x)) * m);
      CHECK(std::abs(d2[i] - 6.0) <= 1e-12 * 6.0 * m * m);
    }
  }
}

TEST_CASE("stencils are linear") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const SpatialGrid g(37);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> u(g.size()), w(g.size()), mix(g.size());
    const double a = dist(rng), b = dist(rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
      u[i] = dist(rng);
      w[i] = dist(rng);
      mix[i] = a * u[i] + b * w[i];
    }
    for (Stencil s : {Stencil::L, Stencil::I, Stencil::DeltaX, Stencil::DeltaX2}) {
      const GridFunction su = apply_stencil(s, GridFunction(g, u), 0.1);
      const GridFunction sw = apply_stencil(s, GridFunction(g, w), 0.1);
      const GridFunction sm = apply_stencil(s, GridFunction(g, mix), 0.1);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double ref = a * su[i] + b * sw[i];
        CHECK(std::abs(sm[i] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)) * 37 * 37);
      }
    }
  }
}

TEST_CASE("grid function invariants") {
  const SpatialGrid g(5);
  CHECK_THROWS_AS(GridFunction(g, std::vector<double>(5, 0.0)), ConfigError);
  GridFunction f(g, 0.0);
  CHECK(f.all_finite());
  f[2] = std::nan("");
  CHECK_FALSE(f.all_finite());
}

TEST_CASE("space-time field starts from its first level") {
  const GridPair grids = build_grids(4, 3, 1.0);
  SpaceTimeField field(grids);
  CHECK(field.levels() == 4);
  CHECK(field.nodes() == 5);
  field.level(3)[2] = 7.0;
  CHECK(field.at(2, 3) == 7.0);
  CHECK(field.final_level()[2] == 7.0);
}

TEST_CASE("linear interpolation") {
  const std::vector<double> xs{0.0, 0.5, 1.0};
  const std::vector<double> ys{1.0, 2.0, 4.0};
  CHECK(interpolate_linear(xs, ys, 0.25) == doctest::Approx(1.5));
  CHECK(interpolate_linear(xs, ys, 0.75) == doctest::Approx(3.0));
  CHECK(interpolate_linear(xs, ys, 1.0) == 4.0);
  CHECK_THROWS_AS(interpolate_linear(xs, ys, 1.5), ConfigError);
  CHECK(interpolate_uniform(ys, 0.5) == 2.0);
  CHECK_THROWS_AS(interpolate_uniform(ys, -0.1), ConfigError);
}

TEST_CASE("assumption report for the smooth example") {
  const ExperimentPreset p = make_preset("ex1a");
  const AssumptionReport r = validate_assumptions(p.spec, p.drift.q);
  CHECK(r.c1_bound == doctest::Approx(std::sin(1.0) + 1.0).epsilon(1e-3));
  CHECK(r.c_v == doctest::Approx(std::pow(std::numbers::pi, 3)).epsilon(1e-3));
  CHECK(r.clause('b').verdict == Verdict::Pass);
  CHECK(r.clause('d').verdict == Verdict::Pass);
  CHECK(r.clause('f').verdict == Verdict::Warn);
  CHECK_FALSE(r.all_pass());
  CHECK_FALSE(r.lower_bound_m.has_value());
  for (char c = 'a'; c <= 'f'; ++c) CHECK(r.clause(c).clause == c);
  CHECK_THROWS_AS(r.clause('g'), ConfigError);
}

TEST_CASE("assumption clause (b) with zero drift") {
  ProblemSpec s = make_preset("ex1a").spec;
  s.potential = 1.0;
  const AssumptionReport r = validate_assumptions(s, [](double) { return 0.0; });
  CHECK(r.c1_bound == 0.0);
  CHECK(r.clause('b').verdict == Verdict::Pass);
}

TEST_CASE("assumption report measures the data slope bound") {
  const ExperimentPreset p = make_preset("ex1a");
  const SpatialGrid g(50);
  const GridFunction data = GridFunction::sample(g, [](double x) { return 2.0 + 0.5 * x; });
  const AssumptionReport r = validate_assumptions(p.spec, GridFunction::sample(g, p.drift.q), data);
  REQUIRE(r.lower_bound_m.has_value());
  CHECK(*r.lower_bound_m == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("problem spec validation") {
  ProblemSpec s = make_preset("ex1a").spec;
  s.validate();
  s.potential = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = make_preset("ex1a").spec;
  s.initial = nullptr;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}
