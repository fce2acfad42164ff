#include "driftinv/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace driftinv {

SpatialGrid::SpatialGrid(int m) : m_(m), h_(0.0) {
  if (m < 3) {
    throw ConfigError("grid-m: need at least 3 intervals, got " + std::to_string(m));
  }
  h_ = 1.0 / m;
}

double SpatialGrid::node(std::size_t i) const {
  // i/m rather than i*h keeps the last node exactly at 1.
  return static_cast<double>(i) / m_;
}

std::vector<double> SpatialGrid::nodes() const {
  std::vector<double> x(size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = node(i);
  return x;
}

TemporalGrid::TemporalGrid(int n_steps, double horizon)
    : n_(n_steps), horizon_(horizon), tau_(0.0) {
  if (n_steps < 1) {
    throw ConfigError("grid-n: need at least one time step, got " + std::to_string(n_steps));
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("horizon: final time must be positive and finite");
  }
  tau_ = horizon / n_steps;
}

double TemporalGrid::time(int n) const {
  return n == n_ ? horizon_ : horizon_ * static_cast<double>(n) / n_;
}

GridPair build_grids(int m, int n_steps, double horizon) {
  return GridPair{SpatialGrid(m), TemporalGrid(n_steps, horizon)};
}

void ProblemSpec::validate() const {
  if (!source && !source_xt) throw ConfigError("source: callable missing");
  if (!initial) throw ConfigError("initial: callable missing");
  if (!right_flux) throw ConfigError("right_flux: callable missing");
  if (!(potential > 0.0) || !std::isfinite(potential)) {
    throw ConfigError("potential: C_p must be positive and finite");
  }
  if (!std::isfinite(left_flux)) throw ConfigError("left_flux: b1 must be finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("horizon: final time must be positive and finite");
  }
}

GridFunction::GridFunction(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ConfigError("grid function: expected " + std::to_string(grid_.size()) +
                      " values, got " + std::to_string(values_.size()));
  }
}

GridFunction::GridFunction(SpatialGrid grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

GridFunction GridFunction::sample(const SpatialGrid& grid, const ScalarFn& fn) {
  GridFunction out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(grid.node(i));
  return out;
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SpaceTimeField::SpaceTimeField(GridPair grids)
    : grids_(grids),
      values_(grids.space.size() * static_cast<std::size_t>(grids.time.steps() + 1), 0.0) {}

std::span<const double> SpaceTimeField::level(int n) const {
  return std::span<const double>(values_).subspan(offset(n), nodes());
}

std::span<double> SpaceTimeField::level(int n) {
  return std::span<double>(values_).subspan(offset(n), nodes());
}

GridFunction SpaceTimeField::level_function(int n) const {
  auto row = level(n);
  return GridFunction(grids_.space, std::vector<double>(row.begin(), row.end()));
}

bool SpaceTimeField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double interpolate_linear(std::span<const double> xs, std::span<const double> ys, double x) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ConfigError("interpolation: need at least two matching samples");
  }
  if (x < xs.front() || x > xs.back()) {
    throw ConfigError("interpolation: point " + std::to_string(x) + " outside data range [" +
                      std::to_string(xs.front()) + ", " + std::to_string(xs.back()) + "]");
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t j = it == xs.end() ? xs.size() - 2
                                 : static_cast<std::size_t>(std::distance(xs.begin(), it)) - 1;
  j = std::min(j, xs.size() - 2);
  if (x == xs[j]) return ys[j];
  const double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
  return (1.0 - t) * ys[j] + t * ys[j + 1];
}

double interpolate_uniform(std::span<const double> ys, double x) {
  const std::size_t n = ys.size();
  if (n < 2) throw ConfigError("interpolation: need at least two samples");
  if (x < 0.0 || x > 1.0) {
    throw ConfigError("interpolation: point " + std::to_string(x) + " outside data range [0, 1]");
  }
  const double pos = x * static_cast<double>(n - 1);
  const double nearest = std::round(pos);
  // Snap to a data node when the target coincides with one up to rounding.
  if (std::abs(pos - nearest) <= 1e-9 * std::max(1.0, pos)) {
    return ys[static_cast<std::size_t>(nearest)];
  }
  const auto j = std::min(static_cast<std::size_t>(pos), n - 2);
  const double t = pos - static_cast<double>(j);
  return (1.0 - t) * ys[j] + t * ys[j + 1];
}

}  // namespace driftinv
