#pragma once

#include <optional>
#include <span>
#include <vector>

#include "driftinv/core_model.hpp"
#include "driftinv/forward_solver.hpp"

namespace driftinv {

struct IterationConfig {
  int max_iter = 20;
  double tol_step = 1e-4;  ///< stop once ||q_{n+1} - q_n||_inf < tol_step
  /// Slopes of the data below this value are floored. When unset the floor
  /// is denom_floor_ratio * max(delta_x g).
  std::optional<double> denom_floor;
  double denom_floor_ratio = 1e-3;
  bool clamp_to_initial = false;
  double mono_tol = 1e-6;

  void validate() const;
};

/// More than this share of floored interior slopes is a data-quality error.
inline constexpr double kMaxFlooredShare = 0.2;

struct IterationTrace {
  std::vector<GridFunction> iterates;  ///< q_0 .. q_final
  std::vector<double> step_norms;      ///< ||q_{n+1} - q_n||_inf
  std::vector<double> residuals;       ///< ||u(.,T; q_n) - g||_inf, one per evaluated q_n
  std::vector<double> mono_violations; ///< max(0, max_i (q_{n+1} - q_n)_i)
  std::vector<double> c1_seminorms;    ///< max_i |delta_x q_n| over interior nodes
  int floor_hits = 0;
  bool converged = false;
};

/// Carries the trace up to the failing iterate.
class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& what, IterationTrace trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const { return trace_; }

private:
  IterationTrace trace_;
};

/**
 * The fixed-point map
 *
 *   K psi = [ f - u_t(.,T; psi) + g'' - C_p g ] / g'
 *
 * discretised with centred differences of the data and the backward time
 * difference of the forward solution. The data-dependent part (the upper
 * bound q_0 and the floored slopes of g) is computed once at construction.
 */
class DriftOperator {
public:
  DriftOperator(GridFunction data, ProblemSpec spec, GridPair grids, IterationConfig cfg = {});

  const GridFunction& initial() const { return initial_; }
  const GridFunction& data() const { return data_; }
  const GridFunction& slopes() const { return slopes_; }
  double floor() const { return floor_; }
  int floor_hits() const { return floor_hits_; }
  const ProblemSpec& spec() const { return spec_; }
  const GridPair& grids() const { return grids_; }

  /// One application of K; the forward field is returned through `field`
  /// when requested.
  GridFunction apply(const GridFunction& q, SpaceTimeField* field = nullptr) const;

private:
  GridFunction data_;
  ProblemSpec spec_;
  GridPair grids_;
  IterationConfig cfg_;
  GridFunction slopes_;
  GridFunction initial_;
  double floor_ = 0.0;
  int floor_hits_ = 0;
};

/// Overwrites the two end values by linear extrapolation from the two
/// nearest interior nodes.
void extrapolate_boundary(GridFunction& q);

/// q_0 = [f + delta_x^2 g - C_p g] / delta_x g inside, extrapolated at the ends.
GridFunction initial_drift(const GridFunction& g, const ProblemSpec& spec,
                           const IterationConfig& cfg = {});

GridFunction apply_K(const GridFunction& q_n, const GridFunction& g, const ProblemSpec& spec,
                     const GridPair& grids, const IterationConfig& cfg = {});

struct IterationResult {
  GridFunction drift;
  IterationTrace trace;
};

/// q_0 from initial_drift, then q_{n+1} = K q_n until the step norm drops
/// below tol_step or max_iter applications have been made. Throws
/// DivergenceError on a non-finite iterate or a failed forward solve.
IterationResult run_iteration(const GridFunction& g, const ProblemSpec& spec, const GridPair& grids,
                              const IterationConfig& cfg = {});

struct ErrorMetrics {
  double rel_l2 = 0.0;
  double rel_linf = 0.0;
  bool absolute = false;  ///< q_true had zero norm; plain norms reported
};

/// Relative discrete L2 (trapezoidal weights) and sup-norm errors. When a
/// mask is given only nodes with mask[i] set take part.
ErrorMetrics error_metrics(const GridFunction& q_rec, const GridFunction& q_true,
                           const std::vector<bool>& mask = {});

}  // namespace driftinv
