#pragma once

#include <span>
#include <vector>

#include "driftinv/core_model.hpp"

namespace driftinv {

/// Tridiagonal matrix of order n in band form plus a right-hand side.
/// lower[i] = A(i+1, i), upper[i] = A(i, i+1).
struct TridiagonalSystem {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;
  std::vector<double> rhs;

  std::size_t order() const { return diag.size(); }
  /// Throws ConfigError when band lengths disagree.
  void check_shape() const;
  std::vector<double> multiply(std::span<const double> x) const;
};

/**
 * LU factorisation of a tridiagonal matrix without pivoting (Thomas
 * algorithm). Built once, reused for every right-hand side.
 */
class TridiagonalFactorization {
public:
  /// Throws SingularSystemError when a pivot falls below 1e-300 in magnitude.
  explicit TridiagonalFactorization(const TridiagonalSystem& sys);

  std::vector<double> solve(std::span<const double> rhs) const;
  void solve_into(std::span<const double> rhs, std::span<double> x) const;

private:
  std::vector<double> lower_;
  std::vector<double> inv_pivot_;
  std::vector<double> upper_scaled_;
};

inline constexpr double kPivotFloor = 1e-300;

std::vector<double> thomas_solve(const TridiagonalSystem& sys);

/**
 * Time-independent step matrix of the implicit scheme
 *
 *   row 0:     (-1/h, 1/h)
 *   row i:     -1/h^2 - q_i/(2h),  1/tau + 2/h^2 + C_p,  -1/h^2 + q_i/(2h)
 *   row m:     (-1/h, 1/h)
 *
 * The rhs is left zeroed.
 */
TridiagonalSystem assemble_step_matrix(const ProblemSpec& spec, const GridFunction& q,
                                       const GridPair& grids);

/// Backward Euler in time, centred differences in space, first-order
/// one-sided Neumann rows. u^0 is v sampled on the nodes.
SpaceTimeField solve_forward(const ProblemSpec& spec, const GridFunction& q,
                             const GridPair& grids);

/// (u^N - u^{N-1}) / tau at every node.
GridFunction final_time_derivative(const SpaceTimeField& field);

}  // namespace driftinv
