#include "gradflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gradflow/costs.hpp"
#include "gradflow/dynamics.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/integrator.hpp"
#include "gradflow/metrics.hpp"
#include "gradflow/oracle.hpp"
#include "gradflow/scenario.hpp"

namespace gradflow {
namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

void add(VerifyReport& report, std::string name, bool pass, std::string detail) {
  report.checks.push_back({std::move(name), pass, std::move(detail)});
}

/// Ring plus random chords: connected and simple by construction.
Topology random_connected_graph(std::mt19937& rng, int nodes, int extra_edges) {
  Topology g = make_ring(nodes);
  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j) {
      const bool ring_edge = (j == i + 1) || (i == 0 && j == nodes - 1);
      if (!ring_edge) candidates.emplace_back(i, j);
    }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const int take = std::min<int>(extra_edges, static_cast<int>(candidates.size()));
  for (int k = 0; k < take; ++k) g.edges.push_back({candidates[k].first, candidates[k].second});
  return g;
}

/// Wraps a cost and biases the first dependency coordinate of its reported
/// gradient; the finite-difference check must catch the lie.
class BiasedGradientCost final : public AgentCost {
 public:
  explicit BiasedGradientCost(std::shared_ptr<const AgentCost> inner)
      : inner_(std::move(inner)) {}

  int variable_count() const override { return inner_->variable_count(); }
  const std::vector<int>& dependency() const override { return inner_->dependency(); }
  double value(const std::vector<double>& x) const override { return inner_->value(x); }
  void gradient(const std::vector<double>& x, std::vector<double>& g) const override {
    inner_->gradient(x, g);
    g[static_cast<size_t>(dependency().front())] += 1e-3;
  }
  void hessian(const std::vector<double>& x,
               std::vector<std::vector<double>>& h) const override {
    inner_->hessian(x, h);
  }

 private:
  std::shared_ptr<const AgentCost> inner_;
};

void check_laplacian_identities(VerifyReport& report) {
  std::mt19937 rng(71);
  double max_factor_dev = 0.0;
  double max_flip_dev = 0.0;
  double min_eigenvalue = 0.0;
  double max_row_sum = 0.0;
  int graphs = 0;

  for (int trial = 0; trial < 8; ++trial) {
    const int nodes = 4 + static_cast<int>(rng() % 6);
    Topology g = random_connected_graph(rng, nodes, static_cast<int>(rng() % 5));
    const EdgeMatrixSet ems = build_incidence(g);
    const auto lap = ems.laplacian_dense();
    const auto inc = ems.incidence_dense();

    for (int i = 0; i < nodes; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < nodes; ++j) {
        double ddt = 0.0;
        for (int k = 0; k < ems.edge_count(); ++k) ddt += inc[i][k] * inc[j][k];
        max_factor_dev = std::max(max_factor_dev, std::abs(lap[i][j] - ddt));
        row_sum += lap[i][j];
      }
      max_row_sum = std::max(max_row_sum, std::abs(row_sum));
    }

    Topology flipped = g;
    for (Edge& e : flipped.edges)
      if (rng() % 2 == 0) std::swap(e.tail, e.head);
    const auto lap_flipped = build_incidence(flipped).laplacian_dense();
    for (int i = 0; i < nodes; ++i)
      for (int j = 0; j < nodes; ++j)
        max_flip_dev = std::max(max_flip_dev, std::abs(lap[i][j] - lap_flipped[i][j]));

    Eigen::MatrixXd m(nodes, nodes);
    for (int i = 0; i < nodes; ++i)
      for (int j = 0; j < nodes; ++j) m(i, j) = lap[i][j];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    min_eigenvalue = std::min(min_eigenvalue, eig.eigenvalues().minCoeff());
    ++graphs;
  }

  const bool pass = max_factor_dev == 0.0 && max_flip_dev == 0.0 &&
                    min_eigenvalue >= -1e-10 && max_row_sum <= 1e-12;
  add(report, "laplacian identities", pass,
      fmt("max |L - D D^T| = %.2g, orientation dev %.2g, min eig %.2g", max_factor_dev,
          max_flip_dev, min_eigenvalue) +
          fmt(" over %g graphs", graphs));
}

void check_gradients(VerifyReport& report, FaultInjection fault) {
  std::mt19937 rng(72);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);

  std::vector<SeparableCost> costs = {build_line3().cost, build_ring20().cost};
  if (fault == FaultInjection::gradient) {
    costs[0].agents[0] = std::make_shared<BiasedGradientCost>(costs[0].agents[0]);
  }

  double max_dev = 0.0;
  int points = 0;
  for (const SeparableCost& cost : costs) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(static_cast<size_t>(cost.variable_count));
      for (double& v : x) v = dist(rng);
      for (int agent = 0; agent < cost.agent_count(); ++agent)
        max_dev = std::max(max_dev, check_gradient(cost, agent, x, 1e-4));
      ++points;
    }
  }
  add(report, "gradient vs finite differences", max_dev <= 1e-6,
      fmt("max deviation %.2g over %g points (tolerance 1e-06)", max_dev,
          static_cast<double>(points)));
}

RhsFn linear_test_field() {
  return [](const FlowState& s, double /*t*/, FlowState& ds) {
    ds.z.resize(s.z.size());
    ds.mu.clear();
    ds.z[0] = -1.0 * s.z[0] + 0.3 * s.z[1];
    ds.z[1] = -0.2 * s.z[0] - 0.7 * s.z[1];
  };
}

void check_integrator_orders(VerifyReport& report) {
  FlowState z0;
  z0.z = {1.0, -1.0};
  const double euler_order = convergence_order(linear_test_field(), z0, Scheme::euler, 0.1, 5.0);
  add(report, "integrator order (euler)", std::abs(euler_order - 1.0) <= 0.2,
      fmt("observed %.3f, expected 1.0 +/- 0.2", euler_order));
  const double rk4_order = convergence_order(linear_test_field(), z0, Scheme::rk4, 0.2, 5.0);
  add(report, "integrator order (rk4)", std::abs(rk4_order - 4.0) <= 0.3,
      fmt("observed %.3f, expected 4.0 +/- 0.3", rk4_order));
}

/// Minimal integration harness for the checks below.
struct FlowRun {
  std::shared_ptr<const AggregateLayout> layout;
  Trajectory trajectory;
};

FlowRun integrate_flow(const Problem& problem, LayoutMode mode, Method method,
                       const GainSchedule& gains, const IntegratorConfig& config,
                       const std::vector<double>* z0 = nullptr) {
  Scenario sc;
  sc.problem = problem;
  sc.problem_name = "inline";
  sc.layout_mode = mode;
  FlowRun run;
  run.layout = std::make_shared<const AggregateLayout>(build_layout(sc));
  MethodSpec spec;
  spec.method = method;
  spec.gains = gains;
  spec.layout = run.layout;
  const Flow flow(spec, std::make_shared<const SeparableCost>(problem.cost));
  const FlowState initial = z0 == nullptr ? flow.initial_state() : flow.initial_state(*z0);
  run.trajectory = integrate(
      [&flow](const FlowState& s, double t, FlowState& ds) { flow.rhs(s, t, ds); }, initial,
      config);
  return run;
}

void check_reduced_full_agreement(VerifyReport& report) {
  std::vector<double> desired(8);
  std::iota(desired.begin(), desired.end(), 1.0);
  const Problem problem = build_ring_problem(8, desired);

  IntegratorConfig config;
  config.dt = 0.01;
  config.horizon = 2000.0;
  config.record_stride = 1000;
  config.stop_residual = 1e-10;
  config.record_multipliers = false;

  const GainSchedule gains;  // unit gains
  const FlowRun full = integrate_flow(problem, LayoutMode::full, Method::PI, gains, config);
  const FlowRun reduced =
      integrate_flow(problem, LayoutMode::reduced, Method::PI, gains, config);
  const OracleResult oracle = solve_consensus_optimum(problem.cost);

  double max_cross = 0.0;
  double max_oracle = 0.0;
  for (int j = 0; j < reduced.layout->variable_count; ++j) {
    for (int agent = 0; agent < reduced.layout->agent_count; ++agent) {
      if (!reduced.layout->tracks(agent, j)) continue;
      const double zr =
          reduced.trajectory.final_state.z[static_cast<size_t>(reduced.layout->z_index(agent, j))];
      const double zf =
          full.trajectory.final_state.z[static_cast<size_t>(full.layout->z_index(agent, j))];
      max_cross = std::max(max_cross, std::abs(zr - zf));
      max_oracle = std::max(max_oracle, std::abs(zr - oracle.x_star[static_cast<size_t>(j)]));
    }
  }
  add(report, "reduced/full layout agreement", max_cross <= 1e-4 && max_oracle <= 1e-4,
      fmt("max |z_reduced - z_full| = %.2g, max |z - x*| = %.2g (tolerance 1e-04)", max_cross,
          max_oracle));
}

void check_dissipation(VerifyReport& report) {
  const Problem problem = build_line3();
  IntegratorConfig config;
  config.dt = 0.01;
  config.horizon = 20.0;
  config.record_stride = 1;

  double worst_increase = 0.0;
  for (const Method method : {Method::I, Method::PI}) {
    Scenario sc;
    sc.problem = problem;
    sc.problem_name = "inline";
    const auto layout = std::make_shared<const AggregateLayout>(build_layout(sc));
    MethodSpec spec;
    spec.method = method;
    spec.layout = layout;
    const Flow flow(spec, std::make_shared<const SeparableCost>(problem.cost));
    const Trajectory tr = integrate(
        [&flow](const FlowState& s, double t, FlowState& ds) { flow.rhs(s, t, ds); },
        flow.initial_state(), config);

    FlowState ds;
    double previous = 0.0;
    for (int i = 0; i < tr.sample_count(); ++i) {
      flow.rhs(tr.states[static_cast<size_t>(i)], tr.times[static_cast<size_t>(i)], ds);
      double v = 0.0;
      for (const double d : ds.z) v += d * d;
      for (const double d : ds.mu) v += d * d;
      v *= 0.5;
      if (i > 0) worst_increase = std::max(worst_increase, v - previous);
      previous = v;
    }
  }
  add(report, "dissipation along multiplier flows", worst_increase <= 1e-8,
      fmt("max per-sample increase of 0.5(|dz|^2+|dmu|^2): %.2g", worst_increase));
}

void check_saddle_point_residuals(VerifyReport& report) {
  const Problem problem = build_line3();
  IntegratorConfig config;
  config.dt = 0.01;
  config.horizon = 300.0;
  config.record_stride = 100;
  config.stop_residual = 1e-9;

  const GainSchedule gains;
  const FlowRun run = integrate_flow(problem, LayoutMode::full, Method::I, gains, config);
  const auto [consensus, stationarity] =
      kkt_residual(problem.cost, *run.layout, run.trajectory.final_state.z,
                   run.trajectory.final_state.mu, gains, run.trajectory.final_time);
  add(report, "saddle-point residuals", consensus <= 1e-3 && stationarity <= 1e-3,
      fmt("consensus %.2g, stationarity %.2g (tolerance 1e-03)", consensus, stationarity));
}

void check_flow_reductions(VerifyReport& report) {
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);

  IntegratorConfig config;
  config.dt = 0.01;
  config.horizon = 0.2;  // 20 steps
  config.record_stride = 1;

  double max_divergence = 0.0;
  int comparisons = 0;
  for (const int agents : {3, 4, 5, 6, 8}) {
    std::vector<double> desired(static_cast<size_t>(agents));
    for (double& d : desired) d = dist(rng);
    const Problem problem = build_ring_problem(agents, desired);

    Scenario sc;
    sc.problem = problem;
    sc.problem_name = "inline";
    const auto layout = std::make_shared<const AggregateLayout>(build_layout(sc));
    const auto cost = std::make_shared<const SeparableCost>(problem.cost);

    const auto make_flow = [&](Method method, double k_p, double k_ip) {
      MethodSpec spec;
      spec.method = method;
      spec.gains.k_p = k_p;
      spec.gains.k_ip = k_ip;
      spec.layout = layout;
      return Flow(spec, cost);
    };
    const Flow pi_no_p = make_flow(Method::PI, 0.0, 1.0);
    const Flow pure_i = make_flow(Method::I, 1.0, 1.0);
    const Flow pi_no_i = make_flow(Method::PI, 1.0, 0.0);
    const Flow pure_p = make_flow(Method::P, 1.0, 1.0);

    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> z0(static_cast<size_t>(layout->z_dim));
      for (double& v : z0) v = dist(rng);

      const auto run = [&](const Flow& flow) {
        return integrate(
            [&flow](const FlowState& s, double t, FlowState& ds) { flow.rhs(s, t, ds); },
            flow.initial_state(z0), config);
      };
      const Trajectory a = run(pi_no_p);
      const Trajectory b = run(pure_i);
      for (int s = 0; s < a.sample_count(); ++s) {
        for (size_t k = 0; k < a.states[static_cast<size_t>(s)].z.size(); ++k)
          max_divergence = std::max(max_divergence,
                                    std::abs(a.states[static_cast<size_t>(s)].z[k] -
                                             b.states[static_cast<size_t>(s)].z[k]));
        for (size_t k = 0; k < a.states[static_cast<size_t>(s)].mu.size(); ++k)
          max_divergence = std::max(max_divergence,
                                    std::abs(a.states[static_cast<size_t>(s)].mu[k] -
                                             b.states[static_cast<size_t>(s)].mu[k]));
      }
      const Trajectory c = run(pi_no_i);
      const Trajectory d = run(pure_p);
      for (int s = 0; s < c.sample_count(); ++s)
        for (size_t k = 0; k < c.states[static_cast<size_t>(s)].z.size(); ++k)
          max_divergence = std::max(max_divergence,
                                    std::abs(c.states[static_cast<size_t>(s)].z[k] -
                                             d.states[static_cast<size_t>(s)].z[k]));
      comparisons += 2;
    }
  }
  add(report, "zero-gain flow reductions", max_divergence <= 1e-12,
      fmt("max per-step divergence %.2g over %g comparisons (tolerance 1e-12)", max_divergence,
          static_cast<double>(comparisons)));
}

void check_communication_accounting(VerifyReport& report) {
  std::mt19937 rng(74);
  int edges_checked = 0;
  bool pass = true;

  const auto check_layout = [&](const AggregateLayout& layout) {
    const std::vector<int> pi = count_communication(Method::PI, layout);
    const std::vector<int> pil = count_communication(Method::PIL, layout);
    for (size_t k = 0; k < pi.size(); ++k) {
      if (pil[k] != 2 * pi[k]) pass = false;
      ++edges_checked;
    }
  };

  check_layout(aggregate_full(build_incidence(build_line3().topology), 2));
  check_layout(aggregate_full(build_incidence(build_ring20().topology), 20));
  for (int trial = 0; trial < 4; ++trial) {
    const int nodes = 4 + static_cast<int>(rng() % 5);
    const Topology g = random_connected_graph(rng, nodes, static_cast<int>(rng() % 4));
    check_layout(aggregate_full(build_incidence(g), 1 + static_cast<int>(rng() % 3)));
  }
  add(report, "communication accounting", pass,
      fmt("Laplacian-form messages are 2x the combined flow on %g edges",
          static_cast<double>(edges_checked)));
}

void check_oracle_consistency(VerifyReport& report) {
  double max_diff = 0.0;
  for (const Problem& problem : {build_line3(), build_ring20()}) {
    const OracleResult analytic = solve_consensus_optimum(problem.cost, OracleSolveMode::analytic);
    const OracleResult numeric = solve_consensus_optimum(problem.cost, OracleSolveMode::numeric);
    for (size_t i = 0; i < analytic.x_star.size(); ++i)
      max_diff = std::max(max_diff, std::abs(analytic.x_star[i] - numeric.x_star[i]));
  }
  add(report, "oracle solver consistency", max_diff <= 1e-6,
      fmt("analytic vs numeric optimum differ by %.2g (tolerance 1e-06)", max_diff));
}

}  // namespace

FaultInjection parse_fault(const std::string& name) {
  if (name == "none" || name.empty()) return FaultInjection::none;
  if (name == "gradient") return FaultInjection::gradient;
  throw ValidationError("unknown fault \"" + name + "\" (expected none or gradient)");
}

bool VerifyReport::all_pass() const {
  for (const VerifyCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

VerifyReport run_verification(FaultInjection fault) {
  VerifyReport report;
  check_laplacian_identities(report);
  check_gradients(report, fault);
  check_integrator_orders(report);
  check_reduced_full_agreement(report);
  check_dissipation(report);
  check_saddle_point_residuals(report);
  check_flow_reductions(report);
  check_communication_accounting(report);
  check_oracle_consistency(report);
  return report;
}

std::string format_verification(const VerifyReport& report) {
  std::ostringstream out;
  size_t passed = 0;
  for (const VerifyCheck& c : report.checks) {
    out << (c.pass ? "[ ok ] " : "[FAIL] ") << c.name;
    for (size_t i = c.name.size(); i < 36; ++i) out.put(' ');
    out << c.detail << "\n";
    if (c.pass) ++passed;
  }
  out << passed << "/" << report.checks.size() << " checks passed\n";
  return out.str();
}

}  // namespace gradflow
