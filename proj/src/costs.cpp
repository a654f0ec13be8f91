#include "gradflow/costs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gradflow {

void AgentCost::gradient_dep(const double* x_dep, double* g_dep) const {
  const auto& dep = dependency();
  std::vector<double> x(variable_count(), 0.0), g;
  for (size_t p = 0; p < dep.size(); ++p) x[dep[p]] = x_dep[p];
  gradient(x, g);
  for (size_t p = 0; p < dep.size(); ++p) g_dep[p] = g[dep[p]];
}

QuadraticAgentCost::QuadraticAgentCost(std::vector<std::vector<double>> q,
                                       std::vector<double> b, double c,
                                       std::vector<int> dep)
    : q_(std::move(q)), b_(std::move(b)), c_(c), dep_(std::move(dep)) {
  const int n = static_cast<int>(b_.size());
  if (static_cast<int>(q_.size()) != n)
    throw ValidationError("quadratic cost: Q and b dimensions disagree");
  for (const auto& row : q_) {
    if (static_cast<int>(row.size()) != n)
      throw ValidationError("quadratic cost: Q is not square");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (q_[i][j] != q_[j][i])
        throw ValidationError("quadratic cost: Q must be symmetric");
    }
  }

  if (dep_.empty()) {
    for (int j = 0; j < n; ++j) {
      bool used = b_[j] != 0.0;
      for (int l = 0; l < n && !used; ++l) used = q_[j][l] != 0.0;
      if (used) dep_.push_back(j);
    }
    if (dep_.empty()) dep_.push_back(0);  // constant cost still owns a slot
  } else {
    std::sort(dep_.begin(), dep_.end());
    dep_.erase(std::unique(dep_.begin(), dep_.end()), dep_.end());
    std::vector<char> in_dep(n, 0);
    for (int j : dep_) {
      if (j < 0 || j >= n)
        throw ValidationError("quadratic cost: dependency index " + std::to_string(j) +
                              " outside [0," + std::to_string(n) + ")");
      in_dep[j] = 1;
    }
    for (int j = 0; j < n; ++j) {
      if (in_dep[j]) continue;
      if (b_[j] != 0.0)
        throw ValidationError("quadratic cost: b has a nonzero entry outside the dependency set");
      for (int l = 0; l < n; ++l) {
        if (q_[j][l] != 0.0)
          throw ValidationError("quadratic cost: Q has a nonzero row outside the dependency set");
      }
    }
  }

  const int d = static_cast<int>(dep_.size());
  q_dep_.resize(static_cast<size_t>(d) * d);
  b_dep_.resize(d);
  for (int p = 0; p < d; ++p) {
    b_dep_[p] = b_[dep_[p]];
    for (int r = 0; r < d; ++r) q_dep_[static_cast<size_t>(p) * d + r] = q_[dep_[p]][dep_[r]];
  }
}

double QuadraticAgentCost::value(const std::vector<double>& x) const {
  const int d = static_cast<int>(dep_.size());
  double quad = 0.0, lin = 0.0;
  for (int p = 0; p < d; ++p) {
    const double xp = x[dep_[p]];
    lin += b_dep_[p] * xp;
    double row = 0.0;
    for (int r = 0; r < d; ++r) row += q_dep_[static_cast<size_t>(p) * d + r] * x[dep_[r]];
    quad += xp * row;
  }
  return 0.5 * quad + lin + c_;
}

void QuadraticAgentCost::gradient(const std::vector<double>& x, std::vector<double>& g) const {
  g.assign(b_.size(), 0.0);
  const int d = static_cast<int>(dep_.size());
  for (int p = 0; p < d; ++p) {
    double acc = b_dep_[p];
    for (int r = 0; r < d; ++r) acc += q_dep_[static_cast<size_t>(p) * d + r] * x[dep_[r]];
    g[dep_[p]] = acc;
  }
}

void QuadraticAgentCost::hessian(const std::vector<double>&,
                                 std::vector<std::vector<double>>& h) const {
  h = q_;
}

void QuadraticAgentCost::gradient_dep(const double* x_dep, double* g_dep) const {
  const int d = static_cast<int>(dep_.size());
  for (int p = 0; p < d; ++p) {
    double acc = b_dep_[p];
    const double* row = q_dep_.data() + static_cast<size_t>(p) * d;
    for (int r = 0; r < d; ++r) acc += row[r] * x_dep[r];
    g_dep[p] = acc;
  }
}

double SeparableCost::total_value(const std::vector<double>& x) const {
  double v = 0.0;
  for (const auto& agent : agents) v += agent->value(x);
  return v;
}

void SeparableCost::total_gradient(const std::vector<double>& x, std::vector<double>& g) const {
  g.assign(variable_count, 0.0);
  std::vector<double> gi;
  for (const auto& agent : agents) {
    agent->gradient(x, gi);
    for (int j : agent->dependency()) g[j] += gi[j];
  }
}

void SeparableCost::validate() const {
  if (variable_count < 1) throw ValidationError("cost: variable count must be positive");
  if (agents.empty()) throw ValidationError("cost: need at least one agent");
  for (int i = 0; i < agent_count(); ++i) {
    if (!agents[i]) throw ValidationError("cost: agent " + std::to_string(i) + " is null");
    if (agents[i]->variable_count() != variable_count)
      throw ValidationError("cost: agent " + std::to_string(i) +
                            " disagrees on the variable count");
    const auto& dep = agents[i]->dependency();
    if (dep.empty())
      throw ValidationError("cost: agent " + std::to_string(i) + " has an empty dependency set");
    for (int j : dep) {
      if (j < 0 || j >= variable_count)
        throw ValidationError("cost: agent " + std::to_string(i) +
                              " depends on variable " + std::to_string(j) +
                              " outside [0," + std::to_string(variable_count) + ")");
    }
  }
}

std::pair<double, std::vector<double>> eval(const SeparableCost& cost, int agent,
                                            const std::vector<double>& x) {
  if (agent < 0 || agent >= cost.agent_count())
    throw ValidationError("eval: agent index out of range");
  if (static_cast<int>(x.size()) != cost.variable_count)
    throw ValidationError("eval: x has the wrong dimension");
  for (double xi : x) {
    if (!std::isfinite(xi)) throw ValidationError("eval: non-finite input");
  }
  std::vector<double> g;
  cost.agents[agent]->gradient(x, g);
  return {cost.agents[agent]->value(x), std::move(g)};
}

double check_gradient(const SeparableCost& cost, int agent, const std::vector<double>& x,
                      double h) {
  if (h <= 0.0) throw ValidationError("check_gradient: step must be positive");
  auto [value, grad] = eval(cost, agent, x);
  (void)value;
  const AgentCost& f = *cost.agents[agent];
  std::vector<double> probe = x;
  double worst = 0.0;
  for (int j = 0; j < cost.variable_count; ++j) {
    probe[j] = x[j] + h;
    const double up = f.value(probe);
    probe[j] = x[j] - h;
    const double down = f.value(probe);
    probe[j] = x[j];
    worst = std::max(worst, std::abs((up - down) / (2.0 * h) - grad[j]));
  }
  return worst;
}

std::vector<std::vector<int>> variable_dependents(const SeparableCost& cost) {
  std::vector<std::vector<int>> dependents(cost.variable_count);
  for (int i = 0; i < cost.agent_count(); ++i) {
    for (int j : cost.agents[i]->dependency()) dependents[j].push_back(i);
  }
  return dependents;
}

Problem build_line3() {
  // f1 = (x0 - 1)^2 + (x0 - x1)^2 / 3
  // f2 = (x1 - 3)^2 + (x0 - x1)^2 / 3
  // f3 = (x0 - 6)^2 + (x0 - x1)^2 / 3
  const double q_own0[2][2] = {{8.0 / 3.0, -2.0 / 3.0}, {-2.0 / 3.0, 2.0 / 3.0}};
  const double q_own1[2][2] = {{2.0 / 3.0, -2.0 / 3.0}, {-2.0 / 3.0, 8.0 / 3.0}};

  auto quad = [](const double (&q)[2][2], double b0, double b1, double c) {
    return std::make_shared<const QuadraticAgentCost>(
        std::vector<std::vector<double>>{{q[0][0], q[0][1]}, {q[1][0], q[1][1]}},
        std::vector<double>{b0, b1}, c);
  };

  Problem p;
  p.cost.variable_count = 2;
  p.cost.agents = {quad(q_own0, -2.0, 0.0, 1.0), quad(q_own1, 0.0, -6.0, 9.0),
                   quad(q_own0, -12.0, 0.0, 36.0)};
  p.cost.validate();
  p.topology = make_path(3);
  p.dependents = variable_dependents(p.cost);
  return p;
}

Problem build_ring_problem(int agent_count, const std::vector<double>& desired) {
  if (agent_count < 3) throw ValidationError("ring problem: need at least 3 agents");
  if (static_cast<int>(desired.size()) != agent_count)
    throw ValidationError("ring problem: desired values must match the agent count");

  Problem p;
  p.cost.variable_count = agent_count;
  for (int a = 0; a < agent_count; ++a) {
    // f_a = (x_prev - x_a)^2 + (x_a - desired[a])^2 + (x_a - x_next)^2
    const int prev = (a + agent_count - 1) % agent_count;
    const int next = (a + 1) % agent_count;
    std::vector<std::vector<double>> q(agent_count, std::vector<double>(agent_count, 0.0));
    std::vector<double> b(agent_count, 0.0);
    q[prev][prev] += 2.0;
    q[next][next] += 2.0;
    q[a][a] += 6.0;
    q[prev][a] -= 2.0;
    q[a][prev] -= 2.0;
    q[next][a] -= 2.0;
    q[a][next] -= 2.0;
    b[a] = -2.0 * desired[a];
    p.cost.agents.push_back(std::make_shared<const QuadraticAgentCost>(
        std::move(q), std::move(b), desired[a] * desired[a],
        std::vector<int>{prev, a, next}));
  }
  p.cost.validate();
  p.topology = make_ring(agent_count);
  p.dependents = variable_dependents(p.cost);
  return p;
}

Problem build_ring20() {
  std::vector<double> desired(20);
  for (int a = 0; a < 20; ++a) desired[a] = a + 1.0;
  return build_ring_problem(20, desired);
}

}  // namespace gradflow
