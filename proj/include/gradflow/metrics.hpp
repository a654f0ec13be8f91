#pragma once

#include <vector>

#include "gradflow/errors.hpp"
#include "gradflow/integrator.hpp"
#include "gradflow/layout.hpp"

namespace gradflow {

/// Step-response metrics of one sampled scalar series x(t), measured against
/// the series' own final value x_f = x(T) and the known optimum x*:
///   overshoot_pct: 100 * max(0, max_t s (x(t) - x_f)) / |x_f - x_0|,
///                  s = sign(x_f - x_0)
///   settle10/settle1: earliest time after which the series stays inside the
///                  10% / 1% band |x(t) - x_f| <= b |x_f - x_0|
///   error_pct:     100 * |x* - x_f| / |x* - x_0| (distance to the optimum,
///                  normalized by the initial distance; falls back to the
///                  |x_f - x_0| normalization when the start sits on x*)
struct ScalarMetrics {
  double overshoot_pct = 0.0;
  double settle10 = 0.0;
  double settle1 = 0.0;
  double error_pct = 0.0;
  double x0 = 0.0;
  double xf = 0.0;
  double xmax = 0.0;  // most-overshooting sample (equals xf when monotone)
  /// |x_f - x_0| below 1e-12: normalizations are meaningless, all four
  /// headline metrics are reported as not-applicable.
  bool degenerate = false;
  /// The band is first entered at the terminal sample itself: the series has
  /// not genuinely settled within the horizon (rendered as "> T").
  bool settle10_at_horizon = false;
  bool settle1_at_horizon = false;
};

/// Metrics of one series sampled at `times`. Throws ValidationError unless
/// both ranges agree and hold at least two samples.
ScalarMetrics scalar_metrics(const std::vector<double>& times,
                             const std::vector<double>& values, double x_star);

struct MetricEntry {
  int agent = 0;
  int variable = 0;
  ScalarMetrics metrics;
};

/// Per-(agent, variable) metrics plus the elementwise worst-case row (maxima
/// over the non-degenerate entries; horizon flags propagate).
struct WorstCaseReport {
  std::vector<MetricEntry> entries;  // sorted by (agent, variable)
  ScalarMetrics worst;
};

/// Evaluates every tracked scalar of the trajectory against x_star (one
/// optimum per variable).
WorstCaseReport report(const Trajectory& trajectory, const AggregateLayout& layout,
                       const std::vector<double>& x_star);

/// Infinity-norm distance of the aggregate state from the replicated optimum:
/// max over tracked (agent, variable) of |x_ij - x*_j|.
double optimality_gap(const std::vector<double>& z_final,
                      const std::vector<double>& x_star, const AggregateLayout& layout);

}  // namespace gradflow
