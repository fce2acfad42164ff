#include "doctest.h"

#include <numeric>
#include <random>

#include "driftinv/errors.hpp"
#include "driftinv/experiment.hpp"
#include "driftinv/mollifier.hpp"
#include "oracles.hpp"

using namespace driftinv;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("zero noise leaves data untouched") {
  const std::vector<double> g{1.0, 2.0, 3.0, 4.5};
  CHECK(add_noise(g, {0.0, 3, NoiseScaling::RelativeToSup}) == g);
}

TEST_CASE("noise statistics") {
  const std::size_t K = 100000;
  std::vector<double> g(K);
  for (std::size_t i = 0; i < K; ++i) g[i] = 2.0 + std::sin(static_cast<double>(i) * 1e-4);
  const NoiseSpec spec{0.01, 7, NoiseScaling::RelativeToSup};
  const double sigma = noise_sigma(g, spec);
  CHECK(sigma == doctest::Approx(0.01 * oracle::sup_norm(g)));

  const auto noisy = add_noise(g, spec);
  std::vector<double> e(K);
  for (std::size_t i = 0; i < K; ++i) e[i] = noisy[i] - g[i];
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / K;
  double var = 0.0;
  for (double v : e) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (K - 1));
  CHECK(std::abs(mean) <= 3.0 * sigma / std::sqrt(static_cast<double>(K)));
  CHECK(std::abs(sd - sigma) <= 0.02 * sigma);
}

TEST_CASE("noise is reproducible per seed") {
  const std::vector<double> g(500, 1.0);
  const NoiseSpec a{0.03, 12345, NoiseScaling::RelativeToSup};
  NoiseSpec b = a;
  b.seed = 12346;
  CHECK(add_noise(g, a) == add_noise(g, a));
  CHECK(add_noise(g, a) != add_noise(g, b));
}

TEST_CASE("noise input validation") {
  CHECK_THROWS_AS(add_noise(std::vector<double>{1.0, 2.0}, {0.01, 1, NoiseScaling::RelativeToSup}),
                  ConfigError);
  CHECK_THROWS_AS(add_noise(std::vector<double>(5, 1.0), {-0.1, 1, NoiseScaling::RelativeToSup}),
                  ConfigError);
}

TEST_CASE("design matrix") {
  const BandedMatrix A = build_design_matrix(3);
  const oracle::Dense expected{{-1, 1, 0}, {0, 1, 0}, {0, -1, 1}};
  CHECK(oracle::from_banded(A) == expected);

  const std::size_t K = 11;
  const BandedMatrix B = build_design_matrix(K);
  const auto ones = B.multiply(std::vector<double>(K, 3.0));
  CHECK(ones.front() == 0.0);
  CHECK(ones.back() == 0.0);
  for (std::size_t i = 1; i + 1 < K; ++i) CHECK(ones[i] == 3.0);

  const auto x = uniform_points(K);
  const auto ax = B.multiply(x);
  CHECK(ax.front() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(ax.back() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK_THROWS_AS(build_design_matrix(2), ConfigError);
}

TEST_CASE("regularization matrix") {
  const BandedMatrix G = build_regularization_matrix(4);
  CHECK(G.rows() == 2);
  CHECK(G.cols() == 4);
  const oracle::Dense expected{{1.0 / 9, -2.0 / 9, 1.0 / 9, 0}, {0, 1.0 / 9, -2.0 / 9, 1.0 / 9}};
  const oracle::Dense got = oracle::from_banded(G);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(got[i][j] == doctest::Approx(expected[i][j]).epsilon(1e-15));
  }

  const std::size_t K = 30;
  const BandedMatrix H = build_regularization_matrix(K);
  std::vector<double> lin(K), sq(K);
  for (std::size_t i = 0; i < K; ++i) {
    lin[i] = 2.0 - 0.5 * static_cast<double>(i);
    sq[i] = static_cast<double>(i * i);
  }
  for (double v : H.multiply(lin)) CHECK(std::abs(v) <= 1e-15);
  const double c = 2.0 / static_cast<double>((K - 1) * (K - 1));
  for (double v : H.multiply(sq)) CHECK(v == doctest::Approx(c).epsilon(1e-12));
  CHECK_THROWS_AS(build_regularization_matrix(2), ConfigError);
}

TEST_CASE("banded matrix products match dense products") {
  std::mt19937_64 rng(3);
  BandedMatrix M(7, 9, 1, 2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      if (M.in_band(i, j)) M.at(i, j) = u(rng);
    }
  }
  CHECK_THROWS_AS(M.at(0, 5), std::out_of_range);
  const oracle::Dense D = oracle::from_banded(M);
  const auto x = random_vector(rng, 9);
  CHECK(oracle::sup_diff(M.multiply(x), oracle::matvec(D, x)) <= 1e-15);
  const auto y = random_vector(rng, 7);
  std::vector<double> ref(9, 0.0);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 9; ++j) ref[j] += D[i][j] * y[i];
  }
  CHECK(oracle::sup_diff(M.multiply_transpose(y), ref) <= 1e-15);
}

TEST_CASE("normal equations are pentadiagonal and symmetric") {
  const std::size_t K = 12;
  const BandedMatrix A = build_design_matrix(K);
  const BandedMatrix G = build_regularization_matrix(K);
  std::mt19937_64 rng(8);
  const auto rhs = random_vector(rng, K);
  const BandedSystem sys = assemble_normal_equations(A, G, rhs, 0.7);
  CHECK(sys.matrix.bandwidth() == 2);
  const oracle::Dense dA = oracle::from_banded(A), dG = oracle::from_banded(G);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      double ref = 0.0;
      for (const auto& row : dA) ref += row[i] * row[j];
      for (const auto& row : dG) ref += 0.7 * row[i] * row[j];
      CHECK(sys.matrix(i, j) == doctest::Approx(ref).epsilon(1e-14));
      CHECK(sys.matrix(i, j) == sys.matrix(j, i));
    }
  }
}

TEST_CASE("rhs assembly") {
  const std::vector<double> g{5.0, 6.0, 7.0};
  const auto r = assemble_rhs(g, 1.0, 2.0, 0.01);
  CHECK(r == std::vector<double>{0.01, 6.0, 0.02});

  const std::size_t K = 101;
  const double h = 1.0 / (K - 1), b1 = 1.0;
  std::vector<double> exact(K);
  for (std::size_t i = 0; i < K; ++i) {
    const double x = static_cast<double>(i) * h;
    exact[i] = b1 * x + x * x;
  }
  const auto rhs = assemble_rhs(exact, b1, b1 + 2.0, h);
  const auto ag = build_design_matrix(K).multiply(exact);
  CHECK(std::abs(ag.front() - rhs.front()) <= 1.01 * h * h);
  CHECK(std::abs(ag.back() - rhs.back()) <= 1.01 * h * h);
  CHECK_THROWS_AS(assemble_rhs(std::vector<double>{1.0, 2.0}, 1.0, 1.0, 0.5), ConfigError);
}

TEST_CASE("tiny lambda reproduces interior data") {
  const std::size_t K = 41;
  std::vector<double> g(K);
  for (std::size_t i = 0; i < K; ++i) g[i] = std::sin(3.0 * static_cast<double>(i) / (K - 1));
  const auto rhs = assemble_rhs(g, 3.0, 3.0 * std::cos(3.0), 1.0 / (K - 1));
  const TikhonovSolution s =
      solve_tikhonov(build_design_matrix(K), build_regularization_matrix(K), rhs, 1e-14);
  for (std::size_t i = 1; i + 1 < K; ++i) CHECK(std::abs(s.g[i] - g[i]) <= 1e-8);
}

TEST_CASE("banded solve matches the dense oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SUBCASE("K = 8, lambda = 0.1") {
    const BandedMatrix A = build_design_matrix(8), G = build_regularization_matrix(8);
    const auto rhs = random_vector(rng, 8);
    const auto ref = oracle::tikhonov_dense(oracle::from_banded(A), oracle::from_banded(G), rhs, 0.1);
    const TikhonovSolution s = solve_tikhonov(A, G, rhs, 0.1);
    CHECK(oracle::sup_diff(s.g, ref) <= 1e-10);
    CHECK(s.gradient_residual <= 1e-10);
  }
  SUBCASE("random K <= 50, lambda in [1e-6, 1]") {
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t K = 3 + static_cast<std::size_t>(47 * u(rng));
      const double lambda = std::pow(10.0, -6.0 * u(rng));
      const BandedMatrix A = build_design_matrix(K), G = build_regularization_matrix(K);
      const auto rhs = random_vector(rng, K);
      const auto ref = oracle::tikhonov_dense(oracle::from_banded(A), oracle::from_banded(G), rhs, lambda);
      const TikhonovSolution s = solve_tikhonov(A, G, rhs, lambda);
      CHECK(oracle::sup_diff(s.g, ref) <= 1e-10);
      CHECK(s.gradient_residual <= 1e-10);
    }
  }
}

TEST_CASE("generic banded least squares matches the dense oracle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 15;
  BandedMatrix A(n + 3, n, 2, 1);
  BandedMatrix G(n - 1, n, 0, 1);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (A.in_band(i, j)) A.at(i, j) = u(rng) + (i == j ? 3.0 : 0.0);
    }
  }
  for (std::size_t i = 0; i < G.rows(); ++i) {
    G.at(i, i) = -1.0;
    G.at(i, i + 1) = 1.0;
  }
  const auto rhs = random_vector(rng, A.rows());
  const auto x = solve_banded_least_squares(A, G, rhs, 0.3);
  const auto ref = oracle::tikhonov_dense(oracle::from_banded(A), oracle::from_banded(G), rhs, 0.3);
  CHECK(oracle::sup_diff(x, ref) <= 1e-11);
}

TEST_CASE("rank-deficient least squares is reported") {
  BandedMatrix A(3, 3, 0, 0);
  A.at(0, 0) = 1.0;
  A.at(1, 1) = 1.0;
  BandedMatrix G(1, 3, 0, 0);
  G.at(0, 0) = 1.0;
  CHECK_THROWS_AS(solve_banded_least_squares(A, G, std::vector<double>{1, 1, 1}, 1.0),
                  FactorizationError);
}

TEST_CASE("mollified data minimise the objective") {
  std::mt19937_64 rng(17);
  const std::size_t K = 30;
  const BandedMatrix A = build_design_matrix(K), G = build_regularization_matrix(K);
  const auto rhs = random_vector(rng, K);
  const double lambda = 0.05;
  const TikhonovSolution s = solve_tikhonov(A, G, rhs, lambda);
  const oracle::Dense dA = oracle::from_banded(A), dG = oracle::from_banded(G);
  const double best = oracle::tikhonov_objective(dA, dG, rhs, lambda, s.g);
  for (int d = 0; d < 10; ++d) {
    auto dir = random_vector(rng, K);
    const double norm = l2(dir, std::vector<double>(K, 0.0));
    for (auto& v : dir) v /= norm;
    for (double sign : {-1.0, 1.0}) {
      std::vector<double> x = s.g;
      for (std::size_t i = 0; i < K; ++i) x[i] += sign * 1e-3 * dir[i];
      CHECK(oracle::tikhonov_objective(dA, dG, rhs, lambda, x) > best);
    }
  }
}

TEST_CASE("lambda selection without noise returns the lower end of the grid") {
  const std::size_t K = 101;
  std::vector<double> g(K, 1.0);
  const BandedMatrix A = build_design_matrix(K), G = build_regularization_matrix(K);
  const auto rhs = assemble_rhs(g, 0.0, 0.0, 0.01);
  const TikhonovConfig cfg;
  const LambdaSelection sel = select_lambda(A, G, rhs, 0.0, cfg);
  CHECK(sel.lambda == doctest::Approx(cfg.mu_min * TikhonovConfig::lambda_scale(K)));
}

TEST_CASE("residual grows and penalty shrinks along the lambda grid") {
  for (std::size_t K : {201u, 2001u}) {
    std::mt19937_64 rng(K);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> g(K);
    for (std::size_t i = 0; i < K; ++i) {
      const double x = static_cast<double>(i) / (K - 1);
      g[i] = 2.0 + std::sin(3.0 * x) + 0.01 * n01(rng);
    }
    const BandedMatrix A = build_design_matrix(K), G = build_regularization_matrix(K);
    const auto rhs = assemble_rhs(g, 3.0, 3.0 * std::cos(3.0), 1.0 / (K - 1));
    const LambdaSelection sel = select_lambda(A, G, rhs, 0.01);
    REQUIRE(sel.grid.size() == 60);
    for (std::size_t k = 1; k < sel.grid.size(); ++k) {
      CHECK(sel.grid[k] > sel.grid[k - 1]);
      CHECK(sel.residuals[k] >= sel.residuals[k - 1] * (1.0 - 1e-10));
      CHECK(sel.penalties[k] <= sel.penalties[k - 1] * (1.0 + 1e-10));
    }
    CHECK(sel.qualified);
    CHECK(sel.residual >= sel.target);
  }
}

TEST_CASE("mollification of the noisy staircase data") {
  const ExperimentPreset p = make_preset("ex3e");
  const Measurement m = generate_data(p);
  const MollifyResult r =
      mollify(m.noisy, p.spec.left_flux, p.spec.right_flux(p.spec.horizon), m.sigma, p.tikhonov);
  CHECK(l2(r.g, m.exact) < l2(m.noisy, m.exact));
  CHECK(r.selection.qualified);
  CHECK(std::abs(r.selection.residual - r.selection.target) <= 0.1 * r.selection.target);
  CHECK(r.selection.target ==
        doctest::Approx(1.01 * std::sqrt(static_cast<double>(m.x.size())) * m.sigma));
}

TEST_CASE("fixed lambda bypasses the search") {
  const std::size_t K = 51;
  std::vector<double> g(K, 1.0);
  TikhonovConfig cfg;
  cfg.lambda = 0.5;
  const MollifyResult r = mollify(g, 0.0, 0.0, 0.01, cfg);
  CHECK(r.selection.lambda == 0.5);
  CHECK(r.selection.grid.empty());
  CHECK(r.solution.lambda == 0.5);
}

TEST_CASE("tikhonov config validation") {
  TikhonovConfig c;
  c.lambda = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.mu_min = 2.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.grid_size = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(TikhonovConfig::lambda_scale(11) == doctest::Approx(1e8));
}

TEST_CASE("restriction to the solver grid") {
  const std::size_t K = 10000;
  const auto x = uniform_points(K);
  CHECK(x.front() == 0.0);
  CHECK(x.back() == 1.0);
  const SpatialGrid target(20);

  const GridFunction lin = restrict_to(x, target);
  for (std::size_t i = 0; i < lin.size(); ++i) CHECK(std::abs(lin[i] - target.node(i)) <= 1e-14);

  const SpatialGrid same(K - 1);
  std::mt19937_64 rng(1);
  const auto data = random_vector(rng, K);
  const GridFunction id = restrict_to(data, same);
  CHECK(std::equal(data.begin(), data.end(), id.values().begin()));

  std::vector<double> s(K);
  for (std::size_t j = 0; j < K; ++j) s[j] = std::sin(std::numbers::pi * x[j]);
  const GridFunction rs = restrict_to(s, target);
  const double h = 1.0 / (K - 1);
  const double bound = std::numbers::pi * std::numbers::pi / 8.0 * h * h;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(std::abs(rs[i] - std::sin(std::numbers::pi * target.node(i))) <= bound + 1e-15);
  }

  const std::vector<double> short_x{0.0, 0.5};
  const std::vector<double> short_y{1.0, 2.0};
  CHECK_THROWS_AS(restrict_to(short_x, short_y, target), ConfigError);
}
