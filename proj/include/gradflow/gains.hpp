#pragma once

#include <optional>

namespace gradflow {

/// Time-varying gradient gain k_G(t) = a / (1 + b t); the canonical fading
/// profile is a = 1, b = 0.1.
struct FadingGain {
  double a = 1.0;
  double b = 0.1;
};

/// Gains of the combined flow: the gradient gain k_G (constant unless `fading`
/// is set), the consensus weight k_P, and the multiplier gain k_I' whose
/// square k_I = k_I'^2 is the weight in the integral-control form.
struct GainSchedule {
  double k_g = 1.0;
  std::optional<FadingGain> fading;
  double k_p = 1.0;
  double k_ip = 1.0;

  double k_g_at(double t) const {
    return fading ? fading->a / (1.0 + fading->b * t) : k_g;
  }
  double k_i() const { return k_ip * k_ip; }
};

}  // namespace gradflow
