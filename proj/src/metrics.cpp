#include "gradflow/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace gradflow {

ScalarMetrics scalar_metrics(const std::vector<double>& times,
                             const std::vector<double>& values, double x_star) {
  if (times.size() != values.size())
    throw ValidationError("metrics: times and values must have the same length");
  if (times.size() < 2) throw ValidationError("metrics: need at least two samples");

  ScalarMetrics m;
  m.x0 = values.front();
  m.xf = values.back();
  m.xmax = m.xf;
  const double span = std::abs(m.xf - m.x0);
  if (span < 1e-12) {
    m.degenerate = true;
    return m;
  }

  const double s = m.xf > m.x0 ? 1.0 : -1.0;
  double peak = 0.0;
  for (double v : values) {
    const double d = s * (v - m.xf);
    if (d > peak) {
      peak = d;
      m.xmax = v;
    }
  }
  m.overshoot_pct = 100.0 * peak / span;

  // Settling is a suffix condition: find the last sample violating each band.
  // A 10% violation is also a 1% violation, so one backward scan finds both.
  const size_t last = values.size() - 1;
  long last1 = -1, last10 = -1;
  for (size_t r = 0; r < values.size(); ++r) {
    const size_t i = last - r;
    const double dev = std::abs(values[i] - m.xf);
    if (last1 < 0 && dev > 0.01 * span) last1 = static_cast<long>(i);
    if (dev > 0.10 * span) {
      last10 = static_cast<long>(i);
      break;
    }
  }
  // The terminal sample never violates (deviation 0), so last + 1 is in range.
  m.settle1 = last1 < 0 ? times.front() : times[last1 + 1];
  m.settle10 = last10 < 0 ? times.front() : times[last10 + 1];
  m.settle1_at_horizon = last1 >= 0 && static_cast<size_t>(last1 + 1) == last;
  m.settle10_at_horizon = last10 >= 0 && static_cast<size_t>(last10 + 1) == last;

  double denom = std::abs(x_star - m.x0);
  if (denom < 1e-12) denom = span;
  m.error_pct = 100.0 * std::abs(x_star - m.xf) / denom;
  return m;
}

WorstCaseReport report(const Trajectory& trajectory, const AggregateLayout& layout,
                       const std::vector<double>& x_star) {
  if (static_cast<int>(x_star.size()) != layout.variable_count)
    throw ValidationError("metrics: x_star must hold one optimum per variable");
  if (trajectory.sample_count() < 2)
    throw ValidationError("metrics: trajectory needs at least two samples");
  for (const FlowState& s : trajectory.states) {
    if (static_cast<int>(s.z.size()) != layout.z_dim)
      throw ValidationError("metrics: trajectory and layout disagree on the z dimension");
  }

  WorstCaseReport out;
  const int samples = trajectory.sample_count();
  std::vector<double> series(samples);
  for (int j = 0; j < layout.variable_count; ++j) {
    const VariableBlock& b = layout.blocks[j];
    for (int p = 0; p < b.size(); ++p) {
      const int idx = b.z_offset + p;
      for (int i = 0; i < samples; ++i) series[i] = trajectory.states[i].z[idx];
      out.entries.push_back({b.nodes[p], j, scalar_metrics(trajectory.times, series, x_star[j])});
    }
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const MetricEntry& a, const MetricEntry& b) {
              return a.agent != b.agent ? a.agent < b.agent : a.variable < b.variable;
            });

  bool any = false;
  for (const MetricEntry& e : out.entries) {
    if (e.metrics.degenerate) continue;
    const ScalarMetrics& m = e.metrics;
    if (!any) {
      out.worst = ScalarMetrics{};
      any = true;
    }
    out.worst.overshoot_pct = std::max(out.worst.overshoot_pct, m.overshoot_pct);
    out.worst.settle10 = std::max(out.worst.settle10, m.settle10);
    out.worst.settle1 = std::max(out.worst.settle1, m.settle1);
    out.worst.error_pct = std::max(out.worst.error_pct, m.error_pct);
    out.worst.settle10_at_horizon |= m.settle10_at_horizon;
    out.worst.settle1_at_horizon |= m.settle1_at_horizon;
  }
  out.worst.degenerate = !any;
  return out;
}

double optimality_gap(const std::vector<double>& z_final,
                      const std::vector<double>& x_star, const AggregateLayout& layout) {
  if (static_cast<int>(z_final.size()) != layout.z_dim)
    throw ValidationError("optimality gap: state dimension mismatch");
  if (static_cast<int>(x_star.size()) != layout.variable_count)
    throw ValidationError("optimality gap: x_star must hold one optimum per variable");
  double gap = 0.0;
  for (int j = 0; j < layout.variable_count; ++j) {
    const VariableBlock& b = layout.blocks[j];
    for (int p = 0; p < b.size(); ++p)
      gap = std::max(gap, std::abs(z_final[b.z_offset + p] - x_star[j]));
  }
  return gap;
}

}  // namespace gradflow
