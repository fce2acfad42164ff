#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftinv/core_model.hpp"

namespace driftinv {

// ---------------------------------------------------------------------------
// Noise model

enum class NoiseScaling {
  RelativeToSup,  ///< sigma = level * sup|g_exact|
};

struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;
  NoiseScaling scaling = NoiseScaling::RelativeToSup;
};

/// Standard deviation of the additive noise for the given exact data.
double noise_sigma(std::span<const double> g_exact, const NoiseSpec& noise);

/// g + e with e_i i.i.d. N(0, sigma^2). Level 0 returns the input unchanged.
/// Throws ConfigError for fewer than 3 samples or a negative level.
std::vector<double> add_noise(std::span<const double> g_exact, const NoiseSpec& noise);

// ---------------------------------------------------------------------------
// Banded matrices

/// Rectangular band matrix: row i stores columns i-kl .. i+ku.
class BandedMatrix {
public:
  BandedMatrix(std::size_t rows, std::size_t cols, std::size_t kl, std::size_t ku);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t lower_bandwidth() const { return kl_; }
  std::size_t upper_bandwidth() const { return ku_; }

  /// Zero outside the band.
  double operator()(std::size_t i, std::size_t j) const;
  /// Throws std::out_of_range outside the band.
  double& at(std::size_t i, std::size_t j);

  bool in_band(std::size_t i, std::size_t j) const {
    return i < rows_ && j < cols_ && j + kl_ >= i && j <= i + ku_;
  }

  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> multiply_transpose(std::span<const double> y) const;

private:
  std::size_t rows_, cols_, kl_, ku_;
  std::vector<double> data_;
};

/// Symmetric band matrix, lower half stored: band[d][i] = S(i+d, i).
class SymmetricBandMatrix {
public:
  SymmetricBandMatrix(std::size_t order, std::size_t bandwidth);

  std::size_t order() const { return n_; }
  std::size_t bandwidth() const { return bw_; }
  double operator()(std::size_t i, std::size_t j) const;
  double& lower(std::size_t i, std::size_t j);  ///< requires i >= j, i - j <= bandwidth

  std::vector<double> multiply(std::span<const double> x) const;

private:
  std::size_t n_, bw_;
  std::vector<std::vector<double>> band_;
};

/// Normal-equation system (A^T A + lambda Gamma^T Gamma) g = A^T rhs. Used
/// to report the gradient residual of a mollified solution.
struct BandedSystem {
  SymmetricBandMatrix matrix;
  std::vector<double> rhs;
};

/// B^T B + weight * C^T C, stored as a symmetric band.
SymmetricBandMatrix gram(const BandedMatrix& B, const BandedMatrix& C, double weight);

/**
 * Minimiser of ||A x - rhs||^2 + lambda ||Gamma x||^2 by Givens QR of the
 * stacked band matrix [A; sqrt(lambda) Gamma]. The normal equations are never
 * formed: at the lambda values the mollifier needs, lambda Gamma^T Gamma
 * swamps A^T A in double precision. Linear in the number of columns. Throws
 * FactorizationError when the stacked matrix is rank deficient.
 */
std::vector<double> solve_banded_least_squares(const BandedMatrix& A, const BandedMatrix& Gamma,
                                               std::span<const double> rhs, double lambda);

/**
 * Design matrix A (K x K): first row (-1, 1, 0, ...), identity rows 1..K-2,
 * last row (..., 0, -1, 1). The end rows turn the Neumann data into first
 * differences.
 */
BandedMatrix build_design_matrix(std::size_t K);

/// Second-difference penalty Gamma ((K-2) x K), rows (1, -2, 1) / (K-1)^2.
BandedMatrix build_regularization_matrix(std::size_t K);

/// (h*b1, g_1, ..., g_{K-2}, h*b2(T)).
std::vector<double> assemble_rhs(std::span<const double> g_noisy, double b1, double b2_at_T,
                                 double h_data);

BandedSystem assemble_normal_equations(const BandedMatrix& A, const BandedMatrix& Gamma,
                                       std::span<const double> rhs, double lambda);

struct TikhonovSolution {
  std::vector<double> g;
  double lambda = 0.0;
  double residual_norm = 0.0;   ///< ||A g - rhs||_2
  double penalty_norm = 0.0;    ///< ||Gamma g||_2
  double gradient_residual = 0.0;  ///< relative sup-norm residual of the normal equations
};

/// Minimiser of ||A g - rhs||^2 + lambda ||Gamma g||^2. lambda = 0 is
/// accepted (A is invertible). Cost is linear in K.
TikhonovSolution solve_tikhonov(const BandedMatrix& A, const BandedMatrix& Gamma,
                                std::span<const double> rhs, double lambda);

struct TikhonovConfig {
  std::optional<double> lambda;  ///< fixed value; unset means discrepancy-principle search
  double safety = 1.01;
  /// Search range for the normalised parameter mu = lambda / (K-1)^8.
  double mu_min = 1e-12;
  double mu_max = 1.0;
  int grid_size = 60;

  void validate() const;
  /// (K-1)^8: converts mu to the lambda multiplying ||Gamma g||^2.
  static double lambda_scale(std::size_t K);
};

struct LambdaSelection {
  double lambda = 0.0;
  double residual = 0.0;
  double target = 0.0;  ///< safety * sqrt(K) * sigma
  bool qualified = false;  ///< false when no grid value reached the target
  std::vector<double> grid;
  std::vector<double> residuals;
  std::vector<double> penalties;
};

/**
 * Discrepancy principle on a logarithmic grid: the smallest lambda whose
 * data residual reaches safety * sqrt(K) * sigma. Falls back to the lower end
 * of the grid (qualified = false) when no grid value does.
 */
LambdaSelection select_lambda(const BandedMatrix& A, const BandedMatrix& Gamma,
                              std::span<const double> rhs, double sigma,
                              const TikhonovConfig& cfg = {});

/// Linear interpolation of uniformly spaced data on [0,1] onto the grid nodes.
GridFunction restrict_to(std::span<const double> data, const SpatialGrid& target);

/// Same for data on arbitrary increasing abscissae; throws ConfigError if a
/// target node lies outside the data range.
GridFunction restrict_to(std::span<const double> data_x, std::span<const double> data,
                         const SpatialGrid& target);

/// Uniform data abscissae j/(K-1).
std::vector<double> uniform_points(std::size_t K);

struct MollifyResult {
  std::vector<double> g;
  LambdaSelection selection;  ///< grid fields empty when lambda was fixed
  TikhonovSolution solution;
};

/// Convenience pipeline: build A, Gamma and the rhs, pick lambda, solve.
MollifyResult mollify(std::span<const double> g_noisy, double b1, double b2_at_T, double sigma,
                      const TikhonovConfig& cfg = {});

}  // namespace driftinv
