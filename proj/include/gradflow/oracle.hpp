#pragma once

#include <utility>
#include <vector>

#include "gradflow/costs.hpp"
#include "gradflow/gains.hpp"
#include "gradflow/layout.hpp"

namespace gradflow {

enum class OracleMethod { analytic, numeric };
enum class OracleSolveMode { automatic, analytic, numeric };

/// Ground-truth optimum of the separable objective (consensus enforced by
/// optimizing over a single shared vector).
struct OracleResult {
  std::vector<double> x_star;
  double f_star = 0.0;
  OracleMethod method = OracleMethod::analytic;
  double residual = 0.0;  // gradient norm of the total cost at x_star
};

/// Solves min_x sum_i f_i(x). Quadratic costs are solved by direct
/// elimination; otherwise (or when forced) a damped Newton iteration runs to
/// gradient norm < 1e-10. Throws ValidationError when the sum is not strictly
/// convex.
OracleResult solve_consensus_optimum(const SeparableCost& cost,
                                     OracleSolveMode mode = OracleSolveMode::automatic);

/// Steady state of the consensus-only flow with constant gains: solves
/// 0 = k_p L z + k_g grad f(z) (Newton for non-quadratic costs). The result
/// is generally biased away from the true optimum.
std::vector<double> predict_P_steady_state(const SeparableCost& cost,
                                           const AggregateLayout& layout, double k_p,
                                           double k_g);

/// Saddle-point certificate at (z, mu): returns
/// (||D^T z||, ||k_g(t) grad f(z) + k_ip D mu||).
std::pair<double, double> kkt_residual(const SeparableCost& cost,
                                       const AggregateLayout& layout,
                                       const std::vector<double>& z,
                                       const std::vector<double>& mu,
                                       const GainSchedule& gains, double t = 0.0);

}  // namespace gradflow
