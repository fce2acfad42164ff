#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftinv/errors.hpp"

namespace driftinv {

using ScalarFn = std::function<double(double)>;
using SpaceTimeFn = std::function<double(double, double)>;

/// Uniform grid x_i = i*h on [0,1], i = 0..m.
class SpatialGrid {
public:
  explicit SpatialGrid(int m);

  int intervals() const { return m_; }
  std::size_t size() const { return static_cast<std::size_t>(m_) + 1; }
  double spacing() const { return h_; }
  double node(std::size_t i) const;
  std::vector<double> nodes() const;

  bool operator==(const SpatialGrid& other) const { return m_ == other.m_; }

private:
  int m_;
  double h_;
};

/// Uniform time levels t_n = n*tau on [0,T], n = 0..N.
class TemporalGrid {
public:
  TemporalGrid(int n_steps, double horizon);

  int steps() const { return n_; }
  double horizon() const { return horizon_; }
  double step() const { return tau_; }
  double time(int n) const;

  bool operator==(const TemporalGrid& other) const {
    return n_ == other.n_ && horizon_ == other.horizon_;
  }

private:
  int n_;
  double horizon_;
  double tau_;
};

struct GridPair {
  SpatialGrid space;
  TemporalGrid time;
};

/// Throws ConfigError naming the offending field when m < 3, n_steps < 1 or
/// horizon <= 0.
GridPair build_grids(int m, int n_steps, double horizon);

/**
 * Coefficients and data of the forward model
 *
 *   u_t - u_xx + q(x) u_x + C_p u = f(x)   on (0,1) x (0,T]
 *   u_x(0,t) = b1,  u_x(1,t) = b2(t),  u(x,0) = v(x).
 *
 * `source_xt` is an optional time-dependent override of `source`, used only
 * for manufactured-solution verification.
 */
struct ProblemSpec {
  ScalarFn source;
  double potential = 0.0;
  ScalarFn initial;
  double left_flux = 0.0;
  ScalarFn right_flux;
  double horizon = 1.0;
  SpaceTimeFn source_xt{};

  double source_at(double x, double t) const {
    return source_xt ? source_xt(x, t) : source(x);
  }

  /// Throws ConfigError if C_p <= 0, b1 is not finite, T <= 0 or a callable
  /// is missing.
  void validate() const;
};

/// Real values on the nodes of a SpatialGrid.
class GridFunction {
public:
  GridFunction(SpatialGrid grid, std::vector<double> values);
  explicit GridFunction(SpatialGrid grid, double fill = 0.0);

  static GridFunction sample(const SpatialGrid& grid, const ScalarFn& fn);

  const SpatialGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const;

private:
  SpatialGrid grid_;
  std::vector<double> values_;
};

/// Discrete solution u_i^n, stored level by level.
class SpaceTimeField {
public:
  explicit SpaceTimeField(GridPair grids);

  const GridPair& grids() const { return grids_; }
  std::size_t nodes() const { return grids_.space.size(); }
  int levels() const { return grids_.time.steps() + 1; }

  double at(std::size_t i, int n) const { return values_[offset(n) + i]; }
  std::span<const double> level(int n) const;
  std::span<double> level(int n);
  GridFunction level_function(int n) const;
  GridFunction final_level() const { return level_function(grids_.time.steps()); }

  bool all_finite() const;

private:
  std::size_t offset(int n) const { return static_cast<std::size_t>(n) * nodes(); }

  GridPair grids_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Difference stencils. All four vanish (or use one-sided differences, for L)
// at the boundary nodes.

enum class Stencil {
  L,        ///< (u1-u0)/h at i=0, u_i/tau inside, (u_m-u_{m-1})/h at i=m
  I,        ///< u_i inside, 0 at the ends
  DeltaX,   ///< centred first difference inside, 0 at the ends
  DeltaX2,  ///< centred second difference inside, 0 at the ends
};

GridFunction apply_stencil(Stencil kind, const GridFunction& u, double tau = 0.0);

// ---------------------------------------------------------------------------
// Diagnostic check of the standing assumptions on the model data.

enum class Verdict { Pass, Warn };

struct ClauseResult {
  char clause;
  Verdict verdict;
  std::string detail;
};

struct AssumptionReport {
  double c1_bound = 0.0;       ///< sup|q| + sup|q'| on the audit grid
  double c_v = 0.0;            ///< max_j sup|v^(j)|, j = 0..3
  std::optional<double> lower_bound_m;  ///< min interior delta_x g, if data given
  std::array<ClauseResult, 6> clauses{};

  bool all_pass() const;
  const ClauseResult& clause(char name) const;
};

inline constexpr int kAuditPoints = 1001;

/// Never throws on a violated clause; the verdict is recorded as Warn. The
/// drift is read off the grid function by linear interpolation.
AssumptionReport validate_assumptions(const ProblemSpec& spec, const GridFunction& q,
                                      const std::optional<GridFunction>& data = std::nullopt);

/// Same, with the drift given as a callable (used by presets, where q is known
/// in closed form).
AssumptionReport validate_assumptions(const ProblemSpec& spec, const ScalarFn& q,
                                      const std::optional<GridFunction>& data = std::nullopt);

/// Piecewise-linear interpolation of (xs, ys) at x. xs must be increasing;
/// throws ConfigError if x lies outside [xs.front(), xs.back()].
double interpolate_linear(std::span<const double> xs, std::span<const double> ys, double x);

/// Interpolation on the uniform grid j/(n-1), j = 0..n-1.
double interpolate_uniform(std::span<const double> ys, double x);

}  // namespace driftinv
