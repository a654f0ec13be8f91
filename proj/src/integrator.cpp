#include "gradflow/integrator.hpp"

#include <cmath>
#include <string>

namespace gradflow {
namespace {

void axpy(FlowState& y, double a, const FlowState& x) {
  for (size_t i = 0; i < y.z.size(); ++i) y.z[i] += a * x.z[i];
  for (size_t i = 0; i < y.mu.size(); ++i) y.mu[i] += a * x.mu[i];
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double vi : v) s += vi * vi;
  return std::sqrt(s);
}

double residual_norm(const FlowState& ds) { return norm2(ds.z) + norm2(ds.mu); }

double inf_norm(const FlowState& s) {
  double m = 0.0;
  for (double v : s.z) m = std::max(m, std::abs(v));
  for (double v : s.mu) m = std::max(m, std::abs(v));
  return m;
}

void check_finite(const FlowState& s, double t) {
  const double norm = inf_norm(s);
  // The negated comparison also trips on NaN.
  if (!(norm <= 1e150)) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "trajectory diverged at t = %.6g (|state| = %.3g)", t,
                  norm);
    throw DivergenceError(msg, t, norm);
  }
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::euler;
  if (name == "rk4") return Scheme::rk4;
  throw ValidationError("unknown scheme '" + name + "' (expected euler or rk4)");
}

const char* scheme_name(Scheme scheme) {
  return scheme == Scheme::euler ? "euler" : "rk4";
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("integrator: dt must be positive");
  if (!(horizon > 0.0)) throw ValidationError("integrator: horizon must be positive");
  if (dt > horizon) throw ValidationError("integrator: dt must not exceed the horizon");
  if (record_stride < 1) throw ValidationError("integrator: record stride must be >= 1");
  if (record_stride * dt > horizon * (1.0 + 1e-9))
    throw ValidationError("integrator: sampling interval exceeds the horizon");
  if (stop_residual && !(*stop_residual > 0.0))
    throw ValidationError("integrator: stop residual must be positive");
}

Trajectory integrate(const RhsFn& rhs, const FlowState& initial,
                     const IntegratorConfig& config) {
  config.validate();
  const long long steps = std::max<long long>(1, std::llround(config.horizon / config.dt));
  const double dt = config.dt;

  FlowState s = initial;
  check_finite(s, 0.0);

  Trajectory out;
  long long last_recorded = -1;
  auto record = [&](long long step) {
    out.times.push_back(step * dt);
    FlowState snap;
    snap.z = s.z;
    if (config.record_multipliers) snap.mu = s.mu;
    out.states.push_back(std::move(snap));
    last_recorded = step;
  };
  record(0);

  FlowState k1, k2, k3, k4, tmp;
  StopReason reason = StopReason::horizon;
  long long final_step = steps;

  for (long long k = 0; k < steps; ++k) {
    const double t = k * dt;
    rhs(s, t, k1);
    if (config.stop_residual && residual_norm(k1) < *config.stop_residual) {
      reason = StopReason::residual;
      final_step = k;
      break;
    }

    if (config.scheme == Scheme::euler) {
      axpy(s, dt, k1);
    } else {
      tmp = s;
      axpy(tmp, 0.5 * dt, k1);
      rhs(tmp, t + 0.5 * dt, k2);
      tmp = s;
      axpy(tmp, 0.5 * dt, k2);
      rhs(tmp, t + 0.5 * dt, k3);
      tmp = s;
      axpy(tmp, dt, k3);
      rhs(tmp, t + dt, k4);
      const double w = dt / 6.0;
      for (size_t i = 0; i < s.z.size(); ++i)
        s.z[i] += w * (k1.z[i] + 2.0 * k2.z[i] + 2.0 * k3.z[i] + k4.z[i]);
      for (size_t i = 0; i < s.mu.size(); ++i)
        s.mu[i] += w * (k1.mu[i] + 2.0 * k2.mu[i] + 2.0 * k3.mu[i] + k4.mu[i]);
    }

    check_finite(s, (k + 1) * dt);
    if ((k + 1) % config.record_stride == 0) record(k + 1);
  }

  if (last_recorded != final_step) record(final_step);
  out.final_state = std::move(s);
  out.final_time = final_step * dt;
  out.reason = reason;
  return out;
}

double convergence_order(const RhsFn& rhs, const FlowState& initial, Scheme scheme,
                         double dt, double horizon) {
  auto final_at = [&](double step) {
    IntegratorConfig config;
    config.scheme = scheme;
    config.dt = step;
    config.horizon = horizon;
    // Only the terminal state matters: sample once per run.
    const long long steps = std::max<long long>(1, std::llround(horizon / step));
    config.record_stride = static_cast<int>(std::min<long long>(steps, 1 << 30));
    return integrate(rhs, initial, config).final_state;
  };

  const FlowState a = final_at(dt);
  const FlowState b = final_at(dt / 2.0);
  const FlowState c = final_at(dt / 4.0);

  auto diff_norm = [](const FlowState& u, const FlowState& v) {
    double s = 0.0;
    for (size_t i = 0; i < u.z.size(); ++i) s += (u.z[i] - v.z[i]) * (u.z[i] - v.z[i]);
    for (size_t i = 0; i < u.mu.size(); ++i) s += (u.mu[i] - v.mu[i]) * (u.mu[i] - v.mu[i]);
    return std::sqrt(s);
  };

  const double coarse = diff_norm(a, b);
  const double fine = diff_norm(b, c);
  if (fine <= 0.0 || coarse <= 0.0)
    throw ValidationError("convergence order: differences vanished; increase dt");
  return std::log2(coarse / fine);
}

}  // namespace gradflow
