#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "gradflow/errors.hpp"
#include "gradflow/graph.hpp"

namespace gradflow {

class QuadraticAgentCost;

/// One agent's convex, twice continuously differentiable cost over the shared
/// variable vector. Gradients vanish outside the agent's dependency set.
class AgentCost {
 public:
  virtual ~AgentCost() = default;

  virtual int variable_count() const = 0;

  /// Ascending variable indices the cost actually depends on.
  virtual const std::vector<int>& dependency() const = 0;

  virtual double value(const std::vector<double>& x) const = 0;

  /// Full-length gradient; entries outside dependency() are zero.
  virtual void gradient(const std::vector<double>& x, std::vector<double>& g) const = 0;

  /// Dense Hessian (constant for quadratics).
  virtual void hessian(const std::vector<double>& x,
                       std::vector<std::vector<double>>& h) const = 0;

  /// Gradient in dependency coordinates: x_dep and g_dep both hold
  /// dependency().size() entries. The default routes through the full-vector
  /// interface; quadratics override with a compact evaluation.
  virtual void gradient_dep(const double* x_dep, double* g_dep) const;

  /// Non-null when the cost is quadratic (enables closed-form solvers).
  virtual const QuadraticAgentCost* as_quadratic() const { return nullptr; }
};

/// f(x) = 0.5 x^T Q x + b^T x + c with Q symmetric positive semidefinite.
/// Rows/columns of Q and entries of b vanish outside the dependency set.
class QuadraticAgentCost final : public AgentCost {
 public:
  /// `dep` may be empty, in which case it is derived from the nonzero pattern.
  QuadraticAgentCost(std::vector<std::vector<double>> q, std::vector<double> b, double c,
                     std::vector<int> dep = {});

  int variable_count() const override { return static_cast<int>(b_.size()); }
  const std::vector<int>& dependency() const override { return dep_; }
  double value(const std::vector<double>& x) const override;
  void gradient(const std::vector<double>& x, std::vector<double>& g) const override;
  void hessian(const std::vector<double>& x,
               std::vector<std::vector<double>>& h) const override;
  void gradient_dep(const double* x_dep, double* g_dep) const override;
  const QuadraticAgentCost* as_quadratic() const override { return this; }

  const std::vector<std::vector<double>>& q() const { return q_; }
  const std::vector<double>& b() const { return b_; }
  double c() const { return c_; }

 private:
  std::vector<std::vector<double>> q_;
  std::vector<double> b_;
  double c_ = 0.0;
  std::vector<int> dep_;
  std::vector<double> q_dep_;  // dependency-indexed Q, row-major d x d
  std::vector<double> b_dep_;
};

/// The separable objective sum_i f_i over a shared n-vector.
struct SeparableCost {
  int variable_count = 0;
  std::vector<std::shared_ptr<const AgentCost>> agents;

  int agent_count() const { return static_cast<int>(agents.size()); }
  const std::vector<int>& dependency(int agent) const { return agents[agent]->dependency(); }

  double total_value(const std::vector<double>& x) const;
  void total_gradient(const std::vector<double>& x, std::vector<double>& g) const;

  /// Throws ValidationError unless agents agree on the variable count and
  /// every dependency index is in range.
  void validate() const;
};

/// Value and gradient of one agent at x. Throws on non-finite input.
std::pair<double, std::vector<double>> eval(const SeparableCost& cost, int agent,
                                            const std::vector<double>& x);

/// Max over coordinates of |central difference - analytic gradient| at x.
double check_gradient(const SeparableCost& cost, int agent, const std::vector<double>& x,
                      double h);

/// Transpose of the dependency sets: variable j -> agents depending on it.
std::vector<std::vector<int>> variable_dependents(const SeparableCost& cost);

/// A cost bound to its communication graph, plus the per-variable tracking
/// sets used to build reduced layouts.
struct Problem {
  SeparableCost cost;
  Topology topology;
  std::vector<std::vector<int>> dependents;
};

/// Three agents on a path sharing a 2-vector; the constrained optimum is
/// x* = (3.4, 3.2).
Problem build_line3();

/// Ring of `agent_count` agents where agent i couples its own variable to its
/// neighbors' variables and to desired[i]; each agent depends on 3 variables.
Problem build_ring_problem(int agent_count, const std::vector<double>& desired);

/// The canonical 20-agent ring instance (desired values 1..20).
Problem build_ring20();

}  // namespace gradflow
