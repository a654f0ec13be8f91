#pragma once

#include <string>
#include <vector>

namespace gradflow {

/// Deliberate defects for exercising the checker itself: `gradient` hands the
/// gradient check a cost whose reported gradient is biased, which must fail
/// that check and only that check.
enum class FaultInjection { none, gradient };

FaultInjection parse_fault(const std::string& name);  // "none", "gradient"

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool all_pass() const;
};

/// Runs the full invariant suite: Laplacian factorization and spectrum,
/// gradients against finite differences, integrator convergence orders,
/// reduced/full layout agreement at the optimum, dissipation along the
/// multiplier flows, saddle-point residuals, zero-gain flow reductions,
/// communication accounting, and oracle self-consistency. Designed to finish
/// in seconds.
VerifyReport run_verification(FaultInjection fault = FaultInjection::none);

/// One status line per check plus a summary count.
std::string format_verification(const VerifyReport& report);

}  // namespace gradflow
