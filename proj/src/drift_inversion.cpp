#include "driftinv/drift_inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace driftinv {

void IterationConfig::validate() const {
  if (max_iter < 1) throw ConfigError("max-iter: must be at least 1");
  if (!(tol_step > 0.0)) throw ConfigError("tol: step tolerance must be positive");
  if (denom_floor && !(*denom_floor > 0.0)) throw ConfigError("denom_floor: must be positive");
  if (!(denom_floor_ratio > 0.0)) throw ConfigError("denom_floor_ratio: must be positive");
  if (!(mono_tol >= 0.0)) throw ConfigError("mono_tol: must be non-negative");
}

void extrapolate_boundary(GridFunction& q) {
  const std::size_t last = q.size() - 1;
  q[0] = 2.0 * q[1] - q[2];
  q[last] = 2.0 * q[last - 1] - q[last - 2];
}

DriftOperator::DriftOperator(GridFunction data, ProblemSpec spec, GridPair grids,
                             IterationConfig cfg)
    : data_(std::move(data)),
      spec_(std::move(spec)),
      grids_(grids),
      cfg_(cfg),
      slopes_(apply_stencil(Stencil::DeltaX, data_)),
      initial_(data_.grid()) {
  spec_.validate();
  cfg_.validate();
  if (!(data_.grid() == grids_.space)) {
    throw ConfigError("drift operator: data and solver grid differ");
  }
  if (!data_.all_finite()) throw DataQualityError("data contains non-finite values");

  const std::size_t last = data_.size() - 1;
  double max_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < last; ++i) max_slope = std::max(max_slope, slopes_[i]);
  floor_ = cfg_.denom_floor ? *cfg_.denom_floor : cfg_.denom_floor_ratio * max_slope;
  if (!(floor_ > 0.0)) {
    throw DataQualityError("data is nowhere increasing (max slope " + std::to_string(max_slope) +
                           "); mollify the data first");
  }
  for (std::size_t i = 1; i < last; ++i) {
    if (slopes_[i] < floor_) {
      slopes_[i] = floor_;
      ++floor_hits_;
    }
  }
  const auto interior = static_cast<double>(last - 1);
  if (floor_hits_ > kMaxFlooredShare * interior) {
    throw DataQualityError(std::to_string(floor_hits_) + " of " +
                           std::to_string(static_cast<int>(interior)) +
                           " data slopes fell below the floor; mollify the data first");
  }

  const GridFunction curvature = apply_stencil(Stencil::DeltaX2, data_);
  for (std::size_t i = 1; i < last; ++i) {
    const double x = grids_.space.node(i);
    initial_[i] = (spec_.source_at(x, spec_.horizon) + curvature[i] - spec_.potential * data_[i]) /
                  slopes_[i];
  }
  extrapolate_boundary(initial_);
}

GridFunction DriftOperator::apply(const GridFunction& q, SpaceTimeField* field) const {
  SpaceTimeField solved = solve_forward(spec_, q, grids_);
  const GridFunction rate = final_time_derivative(solved);

  GridFunction next(grids_.space);
  const std::size_t last = next.size() - 1;
  for (std::size_t i = 1; i < last; ++i) next[i] = initial_[i] - rate[i] / slopes_[i];
  extrapolate_boundary(next);
  if (cfg_.clamp_to_initial) {
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::min(next[i], initial_[i]);
  }
  if (field) *field = std::move(solved);
  return next;
}

GridFunction initial_drift(const GridFunction& g, const ProblemSpec& spec,
                           const IterationConfig& cfg) {
  // The time grid does not enter q_0; any valid one will do.
  const GridPair grids{g.grid(), TemporalGrid(1, spec.horizon)};
  return DriftOperator(g, spec, grids, cfg).initial();
}

GridFunction apply_K(const GridFunction& q_n, const GridFunction& g, const ProblemSpec& spec,
                     const GridPair& grids, const IterationConfig& cfg) {
  return DriftOperator(g, spec, grids, cfg).apply(q_n);
}

namespace {

double sup_distance(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double c1_seminorm(const GridFunction& q) {
  const GridFunction dq = apply_stencil(Stencil::DeltaX, q);
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < dq.size(); ++i) s = std::max(s, std::abs(dq[i]));
  return s;
}

}  // namespace

IterationResult run_iteration(const GridFunction& g, const ProblemSpec& spec, const GridPair& grids,
                              const IterationConfig& cfg) {
  const DriftOperator op(g, spec, grids, cfg);

  IterationTrace trace;
  trace.floor_hits = op.floor_hits();
  trace.iterates.push_back(op.initial());
  trace.c1_seminorms.push_back(c1_seminorm(op.initial()));
  if (!op.initial().all_finite()) {
    throw DivergenceError("initial drift is not finite", std::move(trace));
  }

  SpaceTimeField field(grids);
  for (int k = 0; k < cfg.max_iter; ++k) {
    const GridFunction& current = trace.iterates.back();
    GridFunction next(grids.space);
    try {
      next = op.apply(current, &field);
    } catch (const NumericalError& e) {
      throw DivergenceError(std::string("forward solve failed at iterate ") + std::to_string(k) +
                                ": " + e.what(),
                            std::move(trace));
    }

    double misfit = 0.0;
    const auto u_final = field.level(grids.time.steps());
    for (std::size_t i = 0; i < g.size(); ++i) misfit = std::max(misfit, std::abs(u_final[i] - g[i]));
    trace.residuals.push_back(misfit);

    if (!next.all_finite()) {
      throw DivergenceError("iterate " + std::to_string(k + 1) + " is not finite",
                            std::move(trace));
    }

    double increase = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) increase = std::max(increase, next[i] - current[i]);
    const double step = sup_distance(next, current);

    trace.step_norms.push_back(step);
    trace.mono_violations.push_back(increase);
    trace.c1_seminorms.push_back(c1_seminorm(next));
    trace.iterates.push_back(std::move(next));

    if (step < cfg.tol_step) {
      trace.converged = true;
      break;
    }
  }

  GridFunction drift = trace.iterates.back();
  return IterationResult{std::move(drift), std::move(trace)};
}

ErrorMetrics error_metrics(const GridFunction& q_rec, const GridFunction& q_true,
                           const std::vector<bool>& mask) {
  if (!(q_rec.grid() == q_true.grid())) {
    throw ConfigError("error metrics: drifts live on different grids");
  }
  if (!mask.empty() && mask.size() != q_true.size()) {
    throw ConfigError("error metrics: mask length does not match the grid");
  }
  const std::size_t last = q_true.size() - 1;
  const double h = q_true.grid().spacing();
  double err2 = 0.0, ref2 = 0.0, err_inf = 0.0, ref_inf = 0.0;
  for (std::size_t i = 0; i <= last; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double w = (i == 0 || i == last) ? 0.5 * h : h;
    const double e = q_rec[i] - q_true[i];
    err2 += w * e * e;
    ref2 += w * q_true[i] * q_true[i];
    err_inf = std::max(err_inf, std::abs(e));
    ref_inf = std::max(ref_inf, std::abs(q_true[i]));
  }
  ErrorMetrics m;
  if (ref2 == 0.0 || ref_inf == 0.0) {
    m.absolute = true;
    m.rel_l2 = std::sqrt(err2);
    m.rel_linf = err_inf;
    return m;
  }
  m.rel_l2 = std::sqrt(err2 / ref2);
  m.rel_linf = err_inf / ref_inf;
  return m;
}

}  // namespace driftinv
