#include "gradflow/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace gradflow {
namespace {

bool all_quadratic(const SeparableCost& cost) {
  for (const auto& agent : cost.agents) {
    if (!agent->as_quadratic()) return false;
  }
  return true;
}

int tracked_index(const AggregateLayout& layout, int agent, int variable) {
  const int zi = layout.z_index(agent, variable);
  if (zi < 0)
    throw ValidationError("layout does not track agent " + std::to_string(agent) +
                          "'s dependency on variable " + std::to_string(variable));
  return zi;
}

// Aggregate gradient: for every agent, the gradient of its own cost at its own
// copies, scattered into the flat z ordering.
void aggregate_gradient(const SeparableCost& cost, const AggregateLayout& layout,
                        const std::vector<double>& z, std::vector<double>& out) {
  out.assign(layout.z_dim, 0.0);
  std::vector<double> x_dep, g_dep;
  for (int i = 0; i < cost.agent_count(); ++i) {
    const auto& dep = cost.dependency(i);
    x_dep.resize(dep.size());
    g_dep.resize(dep.size());
    for (size_t p = 0; p < dep.size(); ++p) x_dep[p] = z[tracked_index(layout, i, dep[p])];
    cost.agents[i]->gradient_dep(x_dep.data(), g_dep.data());
    for (size_t p = 0; p < dep.size(); ++p) out[tracked_index(layout, i, dep[p])] += g_dep[p];
  }
}

// Aggregate Hessian at z (constant for quadratic costs).
Eigen::MatrixXd aggregate_hessian(const SeparableCost& cost, const AggregateLayout& layout,
                                  const std::vector<double>& z) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(layout.z_dim, layout.z_dim);
  std::vector<std::vector<double>> hi;
  std::vector<double> xi(cost.variable_count, 0.0);
  for (int i = 0; i < cost.agent_count(); ++i) {
    const auto& dep = cost.dependency(i);
    std::fill(xi.begin(), xi.end(), 0.0);
    for (int j : dep) xi[j] = z[tracked_index(layout, i, j)];
    cost.agents[i]->hessian(xi, hi);
    for (int j : dep) {
      for (int l : dep) {
        h(tracked_index(layout, i, j), tracked_index(layout, i, l)) += hi[j][l];
      }
    }
  }
  return h;
}

Eigen::MatrixXd dense_aggregate_laplacian(const AggregateLayout& layout) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(layout.z_dim, layout.z_dim);
  for (const VariableBlock& b : layout.blocks) {
    for (const Edge& e : b.edges) {
      const int h = b.z_offset + b.node_pos[e.head];
      const int t = b.z_offset + b.node_pos[e.tail];
      l(h, h) += 1.0;
      l(t, t) += 1.0;
      l(h, t) -= 1.0;
      l(t, h) -= 1.0;
    }
  }
  return l;
}

OracleResult solve_analytic(const SeparableCost& cost) {
  const int n = cost.variable_count;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& agent : cost.agents) {
    const QuadraticAgentCost& quad = *agent->as_quadratic();
    for (int j : quad.dependency()) {
      rhs(j) -= quad.b()[j];
      for (int l : quad.dependency()) a(j, l) += quad.q()[j][l];
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, max_eig))
    throw ValidationError("oracle: summed Hessian is not strictly convex");

  Eigen::VectorXd x = a.ldlt().solve(rhs);
  OracleResult result;
  result.x_star.assign(x.data(), x.data() + n);
  result.method = OracleMethod::analytic;
  result.residual = (a * x - rhs).norm();
  result.f_star = cost.total_value(result.x_star);
  return result;
}

OracleResult solve_numeric(const SeparableCost& cost) {
  const int n = cost.variable_count;
  std::vector<double> x(n, 0.0), g, trial(n);
  std::vector<std::vector<double>> hi;

  // Damped Newton: Armijo backtracking along the Newton direction, falling
  // back to steepest descent whenever the Hessian step is unusable.
  double fx = cost.total_value(x);
  for (int iter = 0; iter < 500; ++iter) {
    cost.total_gradient(x, g);
    const Eigen::Map<const Eigen::VectorXd> ge(g.data(), n);
    const double gnorm = ge.norm();
    if (gnorm < 1e-10) {
      OracleResult result;
      result.x_star = std::move(x);
      result.method = OracleMethod::numeric;
      result.residual = gnorm;
      result.f_star = fx;
      return result;
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (const auto& agent : cost.agents) {
      agent->hessian(x, hi);
      for (int j : agent->dependency())
        for (int l : agent->dependency()) h(j, l) += hi[j][l];
    }
    Eigen::VectorXd dir = h.ldlt().solve(-ge);
    double slope = ge.dot(dir);
    if (!dir.allFinite() || slope >= 0.0) {  // not a descent direction
      dir = -ge;
      slope = -gnorm * gnorm;
    }

    double step = 1.0;
    for (;;) {
      for (int j = 0; j < n; ++j) trial[j] = x[j] + step * dir(j);
      if (cost.total_value(trial) <= fx + 1e-4 * step * slope) break;
      step *= 0.5;
      if (step < 1e-18)
        throw ValidationError("oracle: line search stalled; cost may not be smooth");
    }
    x.swap(trial);
    fx = cost.total_value(x);
  }
  throw ValidationError("oracle: iteration did not converge; cost may not be strictly convex");
}

}  // namespace

OracleResult solve_consensus_optimum(const SeparableCost& cost, OracleSolveMode mode) {
  cost.validate();
  if (mode == OracleSolveMode::analytic ||
      (mode == OracleSolveMode::automatic && all_quadratic(cost))) {
    if (!all_quadratic(cost))
      throw ValidationError("oracle: analytic solve requires quadratic costs");
    return solve_analytic(cost);
  }
  return solve_numeric(cost);
}

std::vector<double> predict_P_steady_state(const SeparableCost& cost,
                                           const AggregateLayout& layout, double k_p,
                                           double k_g) {
  cost.validate();
  if (k_g <= 0.0) throw ValidationError("predict_P_steady_state: k_g must be positive");
  if (k_p < 0.0) throw ValidationError("predict_P_steady_state: k_p must be nonnegative");

  const Eigen::MatrixXd lap = dense_aggregate_laplacian(layout);
  std::vector<double> z(layout.z_dim, 0.0), grad, lz;

  // Newton iteration on k_g grad f(z) + k_p L z = 0; one step for quadratics.
  for (int iter = 0; iter < 60; ++iter) {
    aggregate_gradient(cost, layout, z, grad);
    layout.apply_laplacian(z, lz);
    Eigen::VectorXd residual(layout.z_dim);
    for (int i = 0; i < layout.z_dim; ++i) residual(i) = k_g * grad[i] + k_p * lz[i];
    if (residual.norm() < 1e-10) return z;

    Eigen::MatrixXd jac = k_g * aggregate_hessian(cost, layout, z) + k_p * lap;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
    if (qr.rank() < layout.z_dim)
      throw ValidationError("predict_P_steady_state: singular system (degenerate gains)");
    Eigen::VectorXd dz = qr.solve(-residual);
    if (!dz.allFinite())
      throw ValidationError("predict_P_steady_state: solve produced non-finite values");
    for (int i = 0; i < layout.z_dim; ++i) z[i] += dz(i);
  }
  throw ValidationError("predict_P_steady_state: Newton iteration did not converge");
}

std::pair<double, double> kkt_residual(const SeparableCost& cost,
                                       const AggregateLayout& layout,
                                       const std::vector<double>& z,
                                       const std::vector<double>& mu,
                                       const GainSchedule& gains, double t) {
  const double consensus = consensus_residual(layout, z);

  std::vector<double> grad, dmu;
  aggregate_gradient(cost, layout, z, grad);
  layout.apply_incidence(mu, dmu);
  const double k_g = gains.k_g_at(t);
  double sq = 0.0;
  for (int i = 0; i < layout.z_dim; ++i) {
    const double s = k_g * grad[i] + gains.k_ip * dmu[i];
    sq += s * s;
  }
  return {consensus, std::sqrt(sq)};
}

}  // namespace gradflow
