#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gradflow/dynamics.hpp"
#include "gradflow/errors.hpp"

namespace gradflow {

enum class Scheme { euler, rk4 };

Scheme parse_scheme(const std::string& name);  // "euler", "rk4"
const char* scheme_name(Scheme scheme);

/// Fixed-step integration setup. `stop_residual` ends the run early once
/// ||dz|| + ||dmu|| drops below the threshold; `record_multipliers` controls
/// whether snapshots keep mu (the final state always does).
struct IntegratorConfig {
  Scheme scheme = Scheme::rk4;
  double dt = 0.01;
  double horizon = 100.0;
  int record_stride = 10;
  std::optional<double> stop_residual;
  bool record_multipliers = true;

  void validate() const;
};

enum class StopReason { horizon, residual };

/// Sampled solution. Samples sit on the uniform grid record_stride * dt; the
/// terminal state is always recorded and is the only sample allowed off the
/// grid (horizon not a multiple of the sampling interval, or residual stop).
struct Trajectory {
  std::vector<double> times;
  std::vector<FlowState> states;
  FlowState final_state;  // full state (z and mu) at final_time
  double final_time = 0.0;
  StopReason reason = StopReason::horizon;

  int sample_count() const { return static_cast<int>(times.size()); }
};

using RhsFn = std::function<void(const FlowState&, double, FlowState&)>;

/// Integrates ds = rhs(state, t) from t = 0. Deterministic given its inputs.
/// Throws DivergenceError when the state leaves the finite range.
Trajectory integrate(const RhsFn& rhs, const FlowState& initial,
                     const IntegratorConfig& config);

/// Observed order of accuracy by Richardson extrapolation: integrates to
/// `horizon` at steps dt, dt/2, dt/4 and returns log2 of the successive
/// final-state difference ratio.
double convergence_order(const RhsFn& rhs, const FlowState& initial, Scheme scheme,
                         double dt, double horizon);

}  // namespace gradflow
