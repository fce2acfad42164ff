#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "driftinv/core_model.hpp"

namespace driftinv {

namespace {

// Sup-norms of derivatives measured with centred divided differences on the
// audit grid. Nodes whose stencil would leave [0,1] are skipped.
struct Sampled {
  std::vector<double> x;
  std::vector<double> y;
};

Sampled sample_audit(const ScalarFn& fn) {
  Sampled s;
  s.x.resize(kAuditPoints);
  s.y.resize(kAuditPoints);
  for (int j = 0; j < kAuditPoints; ++j) {
    s.x[j] = static_cast<double>(j) / (kAuditPoints - 1);
    s.y[j] = fn(s.x[j]);
  }
  return s;
}

/// Divided difference of order 0..3 at node j, or NaN where it does not fit.
double derivative(const std::vector<double>& y, int j, int order, double h) {
  const int n = static_cast<int>(y.size());
  auto in = [&](int k) { return k >= 0 && k < n; };
  switch (order) {
    case 0:
      return y[j];
    case 1:
      if (!in(j - 1) || !in(j + 1)) return std::numeric_limits<double>::quiet_NaN();
      return (y[j + 1] - y[j - 1]) / (2.0 * h);
    case 2:
      if (!in(j - 1) || !in(j + 1)) return std::numeric_limits<double>::quiet_NaN();
      return (y[j + 1] - 2.0 * y[j] + y[j - 1]) / (h * h);
    default:
      if (!in(j - 2) || !in(j + 2)) return std::numeric_limits<double>::quiet_NaN();
      return (y[j + 2] - 2.0 * y[j + 1] + 2.0 * y[j - 1] - y[j - 2]) / (2.0 * h * h * h);
  }
}

double sup_derivative(const Sampled& s, int order) {
  const double h = 1.0 / (kAuditPoints - 1);
  double sup = 0.0;
  for (int j = 0; j < kAuditPoints; ++j) {
    const double d = derivative(s.y, j, order, h);
    if (std::isfinite(d)) sup = std::max(sup, std::abs(d));
  }
  return sup;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

bool AssumptionReport::all_pass() const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [](const ClauseResult& c) { return c.verdict == Verdict::Pass; });
}

const ClauseResult& AssumptionReport::clause(char name) const {
  for (const auto& c : clauses) {
    if (c.clause == name) return c;
  }
  throw ConfigError(std::string("assumption clause '") + name + "' does not exist");
}

AssumptionReport validate_assumptions(const ProblemSpec& spec, const GridFunction& q,
                                      const std::optional<GridFunction>& data) {
  const auto x = q.grid().nodes();
  std::vector<double> values(q.values().begin(), q.values().end());
  ScalarFn q_fn = [x, values](double at) { return interpolate_linear(x, values, at); };
  return validate_assumptions(spec, q_fn, data);
}

AssumptionReport validate_assumptions(const ProblemSpec& spec, const ScalarFn& q,
                                      const std::optional<GridFunction>& data) {
  AssumptionReport report;
  const double h = 1.0 / (kAuditPoints - 1);

  const Sampled qs = sample_audit(q);
  report.c1_bound = sup_derivative(qs, 0) + sup_derivative(qs, 1);

  const Sampled vs = sample_audit(spec.initial);
  for (int j = 0; j <= 3; ++j) report.c_v = std::max(report.c_v, sup_derivative(vs, j));

  const double M = report.c1_bound;
  const double cp = spec.potential;
  auto verdict = [](bool ok) { return ok ? Verdict::Pass : Verdict::Warn; };

  // (a) q in C^1 with a finite bound; the measured bound is used as M below.
  report.clauses[0] = {'a', verdict(std::isfinite(M)), "||q||_C1 ~ " + fmt(M)};

  // (b) C_p > M
  report.clauses[1] = {'b', verdict(cp > M), "C_p = " + fmt(cp) + " vs ||q||_C1 = " + fmt(M)};

  // (c) b1 > 0
  report.clauses[2] = {'c', verdict(spec.left_flux > 0.0), "b1 = " + fmt(spec.left_flux)};

  // (d) b2 > 0 and b2' > 0 on (0,T]
  {
    const double T = spec.horizon;
    const double dt = T / (kAuditPoints - 1);
    double min_b2 = std::numeric_limits<double>::infinity();
    double min_db2 = std::numeric_limits<double>::infinity();
    for (int j = 1; j < kAuditPoints; ++j) {
      const double t = T * static_cast<double>(j) / (kAuditPoints - 1);
      min_b2 = std::min(min_b2, spec.right_flux(t));
      // one-sided at t = T so the audit stays inside (0,T]
      const double slope = j + 1 < kAuditPoints
                               ? (spec.right_flux(t + dt) - spec.right_flux(t - dt)) / (2.0 * dt)
                               : (spec.right_flux(t) - spec.right_flux(t - dt)) / dt;
      min_db2 = std::min(min_db2, slope);
    }
    report.clauses[3] = {'d', verdict(min_b2 > 0.0 && min_db2 > 0.0),
                         "min b2 = " + fmt(min_b2) + ", min b2' = " + fmt(min_db2)};
  }

  // (e) v' >= 0 and C_v finite
  {
    double min_dv = std::numeric_limits<double>::infinity();
    for (int j = 1; j + 1 < kAuditPoints; ++j) min_dv = std::min(min_dv, derivative(vs.y, j, 1, h));
    report.clauses[4] = {'e', verdict(min_dv >= 0.0 && std::isfinite(report.c_v)),
                         "min v' = " + fmt(min_dv) + ", C_v = " + fmt(report.c_v)};
  }

  // (f) f >= (1+M+C_p) C_v and f' >= (1+2M+C_p) C_v
  {
    const Sampled fs = sample_audit(spec.source ? spec.source
                                                : ScalarFn([&](double at) {
                                                    return spec.source_at(at, spec.horizon);
                                                  }));
    double min_f = std::numeric_limits<double>::infinity();
    double min_df = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kAuditPoints; ++j) {
      min_f = std::min(min_f, fs.y[j]);
      const double d = derivative(fs.y, j, 1, h);
      if (std::isfinite(d)) min_df = std::min(min_df, d);
    }
    const double need_f = (1.0 + M + cp) * report.c_v;
    const double need_df = (1.0 + 2.0 * M + cp) * report.c_v;
    report.clauses[5] = {'f', verdict(min_f >= need_f && min_df >= need_df),
                         "min f = " + fmt(min_f) + " (need " + fmt(need_f) + "), min f' = " +
                             fmt(min_df) + " (need " + fmt(need_df) + ")"};
  }

  if (data) {
    const GridFunction slope = apply_stencil(Stencil::DeltaX, *data);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < slope.size(); ++i) lo = std::min(lo, slope[i]);
    report.lower_bound_m = lo;
  }
  return report;
}

}  // namespace driftinv
