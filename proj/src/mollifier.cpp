#include "driftinv/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace driftinv {

double noise_sigma(std::span<const double> g_exact, const NoiseSpec& noise) {
  double sup = 0.0;
  for (double v : g_exact) sup = std::max(sup, std::abs(v));
  return noise.level * sup;
}

std::vector<double> add_noise(std::span<const double> g_exact, const NoiseSpec& noise) {
  if (g_exact.size() < 3) throw ConfigError("noise: need at least 3 data points");
  if (!(noise.level >= 0.0) || !std::isfinite(noise.level)) {
    throw ConfigError("noise: level must be a non-negative number");
  }
  std::vector<double> out(g_exact.begin(), g_exact.end());
  if (noise.level == 0.0) return out;

  const double sigma = noise_sigma(g_exact, noise);
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v += sigma * normal(rng);
  return out;
}

// ---------------------------------------------------------------------------

BandedMatrix::BandedMatrix(std::size_t rows, std::size_t cols, std::size_t kl, std::size_t ku)
    : rows_(rows), cols_(cols), kl_(kl), ku_(ku), data_(rows * (kl + ku + 1), 0.0) {}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const {
  if (!in_band(i, j)) return 0.0;
  return data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
  if (!in_band(i, j)) {
    throw std::out_of_range("banded matrix: (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is outside the band");
  }
  return data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw ConfigError("banded multiply: length mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const std::size_t lo = i >= kl_ ? i - kl_ : 0;
    const std::size_t hi = std::min(cols_ - 1, i + ku_);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += (*this)(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> BandedMatrix::multiply_transpose(std::span<const double> y) const {
  if (y.size() != rows_) throw ConfigError("banded transpose multiply: length mismatch");
  std::vector<double> x(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const std::size_t lo = i >= kl_ ? i - kl_ : 0;
    const std::size_t hi = std::min(cols_ - 1, i + ku_);
    for (std::size_t j = lo; j <= hi; ++j) x[j] += (*this)(i, j) * y[i];
  }
  return x;
}

SymmetricBandMatrix::SymmetricBandMatrix(std::size_t order, std::size_t bandwidth)
    : n_(order), bw_(bandwidth), band_(bandwidth + 1) {
  for (std::size_t d = 0; d <= bw_; ++d) band_[d].assign(n_ > d ? n_ - d : 0, 0.0);
}

double SymmetricBandMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i < j) std::swap(i, j);
  const std::size_t d = i - j;
  return d <= bw_ && i < n_ ? band_[d][j] : 0.0;
}

double& SymmetricBandMatrix::lower(std::size_t i, std::size_t j) {
  if (i < j || i - j > bw_ || i >= n_) {
    throw std::out_of_range("symmetric band: (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is not in the stored lower band");
  }
  return band_[i - j][j];
}

std::vector<double> SymmetricBandMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    y[j] += band_[0][j] * x[j];
    for (std::size_t d = 1; d <= bw_ && j + d < n_; ++d) {
      y[j + d] += band_[d][j] * x[j];
      y[j] += band_[d][j] * x[j + d];
    }
  }
  return y;
}

SymmetricBandMatrix gram(const BandedMatrix& B, const BandedMatrix& C, double weight) {
  if (B.cols() != C.cols()) throw ConfigError("gram: column counts differ");
  const std::size_t n = B.cols();
  const std::size_t bw = std::max(B.lower_bandwidth() + B.upper_bandwidth(),
                                  C.lower_bandwidth() + C.upper_bandwidth());
  SymmetricBandMatrix S(n, bw);

  auto accumulate = [&S](const BandedMatrix& M, double w) {
    for (std::size_t r = 0; r < M.rows(); ++r) {
      const std::size_t lo = r >= M.lower_bandwidth() ? r - M.lower_bandwidth() : 0;
      const std::size_t hi = std::min(M.cols() - 1, r + M.upper_bandwidth());
      for (std::size_t i = lo; i <= hi; ++i) {
        const double mi = M(r, i);
        if (mi == 0.0) continue;
        for (std::size_t j = lo; j <= i; ++j) S.lower(i, j) += w * mi * M(r, j);
      }
    }
  };
  accumulate(B, 1.0);
  if (weight != 0.0) accumulate(C, weight);
  return S;
}

std::vector<double> solve_banded_least_squares(const BandedMatrix& A, const BandedMatrix& Gamma,
                                               std::span<const double> rhs, double lambda) {
  if (A.cols() != Gamma.cols()) throw ConfigError("least squares: column counts differ");
  if (rhs.size() != A.rows()) throw ConfigError("least squares: rhs length does not match A");
  const std::size_t n = A.cols();
  const std::size_t width = std::max(A.lower_bandwidth() + A.upper_bandwidth(),
                                     Gamma.lower_bandwidth() + Gamma.upper_bandwidth()) + 1;

  // Rows of [A; sqrt(lambda) Gamma] enter in order of their first band column,
  // so a rotated row never reaches past the last filled row of R.
  struct Pending {
    std::size_t lead;
    bool penalty;
    std::size_t row;
  };
  std::vector<Pending> order;
  order.reserve(A.rows() + Gamma.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    order.push_back({i > A.lower_bandwidth() ? i - A.lower_bandwidth() : 0, false, i});
  }
  if (lambda > 0.0) {
    for (std::size_t i = 0; i < Gamma.rows(); ++i) {
      order.push_back({i > Gamma.lower_bandwidth() ? i - Gamma.lower_bandwidth() : 0, true, i});
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Pending& a, const Pending& b) { return a.lead < b.lead; });

  // R row j holds columns j .. j+width-1.
  std::vector<double> R(n * width, 0.0);
  std::vector<double> d(n, 0.0);
  std::vector<char> filled(n, 0);
  std::vector<double> v(width);
  const double weight = std::sqrt(lambda);

  for (const Pending& p : order) {
    const BandedMatrix& M = p.penalty ? Gamma : A;
    const double w = p.penalty ? weight : 1.0;
    for (std::size_t k = 0; k < width; ++k) v[k] = w * M(p.row, p.lead + k);
    double beta = p.penalty ? 0.0 : rhs[p.row];

    std::size_t j = p.lead;
    while (j < n) {
      if (v[0] == 0.0) {
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) break;
        std::rotate(v.begin(), v.begin() + 1, v.end());
        v.back() = 0.0;
        ++j;
        continue;
      }
      double* r = &R[j * width];
      if (!filled[j]) {
        std::copy(v.begin(), v.end(), r);
        d[j] = beta;
        filled[j] = 1;
        break;
      }
      const double rho = std::hypot(r[0], v[0]);
      const double c = r[0] / rho;
      const double s = v[0] / rho;
      r[0] = rho;
      for (std::size_t k = 1; k < width; ++k) {
        const double rk = r[k];
        r[k] = c * rk + s * v[k];
        v[k - 1] = -s * rk + c * v[k];
      }
      v.back() = 0.0;
      const double dj = d[j];
      d[j] = c * dj + s * beta;
      beta = -s * dj + c * beta;
      ++j;
    }
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t j = n; j-- > 0;) {
    const double* r = &R[j * width];
    if (!filled[j] || !(std::abs(r[0]) > 0.0)) {
      throw FactorizationError("least-squares system is rank deficient at column " +
                               std::to_string(j));
    }
    double acc = d[j];
    for (std::size_t k = 1; k < width && j + k < n; ++k) acc -= r[k] * x[j + k];
    x[j] = acc / r[0];
  }
  return x;
}

BandedMatrix build_design_matrix(std::size_t K) {
  if (K < 3) throw ConfigError("data-points: design matrix needs K >= 3, got " + std::to_string(K));
  BandedMatrix A(K, K, 1, 1);
  A.at(0, 0) = -1.0;
  A.at(0, 1) = 1.0;
  for (std::size_t i = 1; i + 1 < K; ++i) A.at(i, i) = 1.0;
  A.at(K - 1, K - 2) = -1.0;
  A.at(K - 1, K - 1) = 1.0;
  return A;
}

BandedMatrix build_regularization_matrix(std::size_t K) {
  if (K < 3) {
    throw ConfigError("data-points: regularization matrix needs K >= 3, got " + std::to_string(K));
  }
  const double scale = 1.0 / (static_cast<double>(K - 1) * static_cast<double>(K - 1));
  BandedMatrix G(K - 2, K, 0, 2);
  for (std::size_t i = 0; i + 2 < K; ++i) {
    G.at(i, i) = scale;
    G.at(i, i + 1) = -2.0 * scale;
    G.at(i, i + 2) = scale;
  }
  return G;
}

std::vector<double> assemble_rhs(std::span<const double> g_noisy, double b1, double b2_at_T,
                                 double h_data) {
  if (g_noisy.size() < 3) {
    throw ConfigError("mollifier rhs: need at least 3 data values, got " +
                      std::to_string(g_noisy.size()));
  }
  std::vector<double> rhs(g_noisy.begin(), g_noisy.end());
  rhs.front() = h_data * b1;
  rhs.back() = h_data * b2_at_T;
  return rhs;
}

BandedSystem assemble_normal_equations(const BandedMatrix& A, const BandedMatrix& Gamma,
                                       std::span<const double> rhs, double lambda) {
  if (rhs.size() != A.rows()) {
    throw ConfigError("normal equations: rhs has " + std::to_string(rhs.size()) +
                      " entries, design matrix has " + std::to_string(A.rows()) + " rows");
  }
  return BandedSystem{gram(A, Gamma, lambda), A.multiply_transpose(rhs)};
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

TikhonovSolution solve_tikhonov(const BandedMatrix& A, const BandedMatrix& Gamma,
                                std::span<const double> rhs, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda: must be a non-negative number");
  }
  TikhonovSolution sol;
  sol.lambda = lambda;
  sol.g = solve_banded_least_squares(A, Gamma, rhs, lambda);
  if (!std::all_of(sol.g.begin(), sol.g.end(), [](double x) { return std::isfinite(x); })) {
    throw FactorizationError("mollifier produced non-finite values");
  }

  const BandedSystem sys = assemble_normal_equations(A, Gamma, rhs, lambda);

  auto fit = A.multiply(sol.g);
  for (std::size_t i = 0; i < fit.size(); ++i) fit[i] -= rhs[i];
  sol.residual_norm = norm2(fit);
  sol.penalty_norm = norm2(Gamma.multiply(sol.g));

  auto grad = sys.matrix.multiply(sol.g);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= sys.rhs[i];
  const double scale = sup_norm(sys.rhs);
  sol.gradient_residual = scale > 0.0 ? sup_norm(grad) / scale : sup_norm(grad);
  return sol;
}

void TikhonovConfig::validate() const {
  if (lambda && !(*lambda > 0.0)) throw ConfigError("lambda: fixed value must be positive");
  if (!(mu_min > 0.0) || !(mu_max > mu_min)) {
    throw ConfigError("lambda grid: need 0 < lower bound < upper bound");
  }
  if (grid_size < 2) throw ConfigError("lambda grid: need at least 2 points");
  if (!(safety > 0.0)) throw ConfigError("lambda grid: safety factor must be positive");
}

double TikhonovConfig::lambda_scale(std::size_t K) {
  const double n = static_cast<double>(K - 1);
  const double n2 = n * n;
  return n2 * n2 * n2 * n2;
}

LambdaSelection select_lambda(const BandedMatrix& A, const BandedMatrix& Gamma,
                              std::span<const double> rhs, double sigma,
                              const TikhonovConfig& cfg) {
  cfg.validate();
  const std::size_t K = A.cols();
  const double scale = TikhonovConfig::lambda_scale(K);

  LambdaSelection sel;
  sel.target = cfg.safety * std::sqrt(static_cast<double>(K)) * sigma;
  const double log_lo = std::log10(cfg.mu_min);
  const double log_hi = std::log10(cfg.mu_max);
  for (int k = 0; k < cfg.grid_size; ++k) {
    const double mu = std::pow(10.0, log_lo + (log_hi - log_lo) * k / (cfg.grid_size - 1));
    sel.grid.push_back(mu * scale);
  }
  sel.lambda = sel.grid.front();

  if (sigma <= 0.0) {
    sel.residual = solve_tikhonov(A, Gamma, rhs, sel.lambda).residual_norm;
    sel.qualified = true;
    return sel;
  }

  for (double lambda : sel.grid) {
    const TikhonovSolution sol = solve_tikhonov(A, Gamma, rhs, lambda);
    sel.residuals.push_back(sol.residual_norm);
    sel.penalties.push_back(sol.penalty_norm);
    if (!sel.qualified && sol.residual_norm >= sel.target) {
      sel.qualified = true;
      sel.lambda = lambda;
      sel.residual = sol.residual_norm;
    }
  }
  if (!sel.qualified) sel.residual = sel.residuals.empty() ? 0.0 : sel.residuals.front();
  return sel;
}

std::vector<double> uniform_points(std::size_t K) {
  std::vector<double> x(K);
  for (std::size_t j = 0; j < K; ++j) x[j] = static_cast<double>(j) / static_cast<double>(K - 1);
  return x;
}

GridFunction restrict_to(std::span<const double> data, const SpatialGrid& target) {
  GridFunction out(target);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = interpolate_uniform(data, target.node(i));
  return out;
}

GridFunction restrict_to(std::span<const double> data_x, std::span<const double> data,
                         const SpatialGrid& target) {
  GridFunction out(target);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = interpolate_linear(data_x, data, target.node(i));
  }
  return out;
}

MollifyResult mollify(std::span<const double> g_noisy, double b1, double b2_at_T, double sigma,
                      const TikhonovConfig& cfg) {
  cfg.validate();
  const std::size_t K = g_noisy.size();
  const BandedMatrix A = build_design_matrix(K);
  const BandedMatrix Gamma = build_regularization_matrix(K);
  const double h = 1.0 / static_cast<double>(K - 1);
  const auto rhs = assemble_rhs(g_noisy, b1, b2_at_T, h);

  MollifyResult out;
  if (cfg.lambda) {
    out.selection.lambda = *cfg.lambda;
    out.selection.qualified = true;
  } else {
    out.selection = select_lambda(A, Gamma, rhs, sigma, cfg);
  }
  out.solution = solve_tikhonov(A, Gamma, rhs, out.selection.lambda);
  out.selection.residual = out.solution.residual_norm;
  out.g = out.solution.g;
  return out;
}

}  // namespace driftinv
