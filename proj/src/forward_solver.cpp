#include "driftinv/forward_solver.hpp"

#include <cmath>
#include <string>

namespace driftinv {

void TridiagonalSystem::check_shape() const {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() + 1 != n || upper.size() + 1 != n) {
    throw ConfigError("tridiagonal system: band lengths inconsistent with order " +
                      std::to_string(n));
  }
  if (!rhs.empty() && rhs.size() != n) {
    throw ConfigError("tridiagonal system: rhs has " + std::to_string(rhs.size()) +
                      " entries, expected " + std::to_string(n));
  }
}

std::vector<double> TridiagonalSystem::multiply(std::span<const double> x) const {
  const std::size_t n = order();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += lower[i - 1] * x[i - 1];
    if (i + 1 < n) acc += upper[i] * x[i + 1];
    y[i] = acc;
  }
  return y;
}

TridiagonalFactorization::TridiagonalFactorization(const TridiagonalSystem& sys) {
  sys.check_shape();
  const std::size_t n = sys.order();
  lower_ = sys.lower;
  inv_pivot_.resize(n);
  upper_scaled_.resize(n > 0 ? n - 1 : 0);

  double pivot = sys.diag[0];
  for (std::size_t i = 0;; ++i) {
    if (!(std::abs(pivot) >= kPivotFloor)) {
      throw SingularSystemError("tridiagonal solve: zero pivot at row " + std::to_string(i));
    }
    inv_pivot_[i] = 1.0 / pivot;
    if (i + 1 == n) break;
    upper_scaled_[i] = sys.upper[i] * inv_pivot_[i];
    pivot = sys.diag[i + 1] - sys.lower[i] * upper_scaled_[i];
  }
}

void TridiagonalFactorization::solve_into(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = inv_pivot_.size();
  if (rhs.size() != n || x.size() != n) {
    throw ConfigError("tridiagonal solve: rhs length " + std::to_string(rhs.size()) +
                      " does not match order " + std::to_string(n));
  }
  // forward sweep: x holds the intermediate y
  x[0] = rhs[0] * inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) {
    x[i] = (rhs[i] - lower_[i - 1] * x[i - 1]) * inv_pivot_[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= upper_scaled_[i] * x[i + 1];
}

std::vector<double> TridiagonalFactorization::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.size());
  solve_into(rhs, x);
  return x;
}

std::vector<double> thomas_solve(const TridiagonalSystem& sys) {
  return TridiagonalFactorization(sys).solve(sys.rhs);
}

TridiagonalSystem assemble_step_matrix(const ProblemSpec& spec, const GridFunction& q,
                                       const GridPair& grids) {
  if (!(q.grid() == grids.space)) {
    throw ConfigError("step matrix: drift lives on a different spatial grid");
  }
  const std::size_t n = grids.space.size();
  const std::size_t last = n - 1;
  const double h = grids.space.spacing();
  const double tau = grids.time.step();
  const double inv_h2 = 1.0 / (h * h);

  TridiagonalSystem sys;
  sys.lower.assign(n - 1, 0.0);
  sys.diag.assign(n, 0.0);
  sys.upper.assign(n - 1, 0.0);
  sys.rhs.assign(n, 0.0);

  sys.diag[0] = -1.0 / h;
  sys.upper[0] = 1.0 / h;
  for (std::size_t i = 1; i < last; ++i) {
    const double adv = q[i] / (2.0 * h);
    sys.lower[i - 1] = -inv_h2 - adv;
    sys.diag[i] = 1.0 / tau + 2.0 * inv_h2 + spec.potential;
    sys.upper[i] = -inv_h2 + adv;
  }
  sys.lower[last - 1] = -1.0 / h;
  sys.diag[last] = 1.0 / h;
  return sys;
}

SpaceTimeField solve_forward(const ProblemSpec& spec, const GridFunction& q,
                             const GridPair& grids) {
  spec.validate();
  const TridiagonalSystem sys = assemble_step_matrix(spec, q, grids);
  const TridiagonalFactorization lu(sys);

  const auto& space = grids.space;
  const std::size_t last = space.size() - 1;
  const double inv_tau = 1.0 / grids.time.step();

  SpaceTimeField field(grids);
  {
    auto u0 = field.level(0);
    for (std::size_t i = 0; i <= last; ++i) u0[i] = spec.initial(space.node(i));
  }

  std::vector<double> rhs(space.size());
  for (int n = 1; n <= grids.time.steps(); ++n) {
    const double t = grids.time.time(n);
    const auto prev = field.level(n - 1);
    rhs[0] = spec.left_flux;
    for (std::size_t i = 1; i < last; ++i) {
      rhs[i] = inv_tau * prev[i] + spec.source_at(space.node(i), t);
    }
    rhs[last] = spec.right_flux(t);
    lu.solve_into(rhs, field.level(n));
  }
  return field;
}

GridFunction final_time_derivative(const SpaceTimeField& field) {
  const int N = field.grids().time.steps();
  const double tau = field.grids().time.step();
  const auto now = field.level(N);
  const auto before = field.level(N - 1);
  GridFunction out(field.grids().space);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (now[i] - before[i]) / tau;
  return out;
}

}  // namespace driftinv
