#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "gradflow/dynamics.hpp"
#include "test_support.hpp"

using namespace gradflow;
using gradflow::testing::random_connected_topology;
using gradflow::testing::to_eigen;

namespace {

struct RandomProblem {
  Topology topology;
  std::shared_ptr<SeparableCost> cost;
};

/// One agent per node, each depending on a random nonempty variable subset,
/// with a random symmetric PSD quadratic on those coordinates.
RandomProblem random_problem(std::mt19937& rng, int max_nodes = 8, int max_vars = 3) {
  RandomProblem p;
  p.topology = random_connected_topology(rng, max_nodes);
  std::uniform_int_distribution<int> var_dist(1, max_vars);
  const int n = var_dist(rng);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::bernoulli_distribution pick(0.5);

  p.cost = std::make_shared<SeparableCost>();
  p.cost->variable_count = n;
  for (int i = 0; i < p.topology.node_count; ++i) {
    std::vector<int> dep;
    for (int j = 0; j < n; ++j) {
      if (pick(rng)) dep.push_back(j);
    }
    if (dep.empty()) dep.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));

    const int d = static_cast<int>(dep.size());
    Eigen::MatrixXd a(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) a(r, c) = coef(rng);
    const Eigen::MatrixXd qd = a.transpose() * a;  // PSD on the dependency block

    std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (int r = 0; r < d; ++r) {
      b[dep[r]] = coef(rng);
      for (int c = 0; c < d; ++c) q[dep[r]][dep[c]] = qd(r, c);
    }
    p.cost->agents.push_back(
        std::make_shared<const QuadraticAgentCost>(q, b, coef(rng), dep));
  }
  return p;
}

std::shared_ptr<const AggregateLayout> make_full(const RandomProblem& p) {
  return std::make_shared<const AggregateLayout>(
      aggregate_full(build_incidence(p.topology), p.cost->variable_count));
}

std::shared_ptr<const AggregateLayout> make_reduced(const RandomProblem& p,
                                                    std::mt19937* rng = nullptr) {
  auto dependents = variable_dependents(*p.cost);
  for (auto& set : dependents) {
    // The tracking sets must induce connected subgraphs; grow them the same
    // way the scenario runner does.
    if (rng) {  // occasionally track extra agents
      std::uniform_int_distribution<int> node(0, p.topology.node_count - 1);
      if (node(*rng) == 0) set.push_back(node(*rng));
    }
    set = augment_to_connected(p.topology, set);
  }
  return std::make_shared<const AggregateLayout>(aggregate_reduced(p.topology, dependents));
}

FlowState random_state(std::mt19937& rng, const Flow& flow) {
  FlowState s = flow.initial_state();
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (double& v : s.z) v = dist(rng);
  for (double& v : s.mu) v = dist(rng);
  return s;
}

/// Dense reference: assembles H, b, L, D for the layout with Eigen and
/// evaluates the flow formulas directly.
struct DenseModel {
  Eigen::MatrixXd h, lap, d;
  Eigen::VectorXd b;

  DenseModel(const SeparableCost& cost, const AggregateLayout& layout) {
    h = Eigen::MatrixXd::Zero(layout.z_dim, layout.z_dim);
    b = Eigen::VectorXd::Zero(layout.z_dim);
    for (int i = 0; i < cost.agent_count(); ++i) {
      const auto* quad = cost.agents[i]->as_quadratic();
      for (int j : quad->dependency()) {
        b(layout.z_index(i, j)) += quad->b()[j];
        for (int l : quad->dependency())
          h(layout.z_index(i, j), layout.z_index(i, l)) += quad->q()[j][l];
      }
    }
    const auto dd = layout.incidence_dense();
    d = Eigen::MatrixXd::Zero(layout.z_dim, layout.mu_dim);
    for (int r = 0; r < layout.z_dim; ++r)
      for (int c = 0; c < layout.mu_dim; ++c) d(r, c) = dd[r][c];
    lap = d * d.transpose();
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& z) const { return h * z + b; }
};

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

TEST_CASE("consensus term vanishes at equal states") {
  const Problem p = build_line3();
  auto layout = std::make_shared<const AggregateLayout>(
      aggregate_full(build_incidence(p.topology), 2));
  auto cost = std::make_shared<const SeparableCost>(p.cost);

  MethodSpec spec;
  spec.method = Method::P;
  spec.layout = layout;
  Flow flow(spec, cost);

  // z = 0: the derivative is the pure (negated) gradient, -b stacked.
  FlowState ds;
  flow.rhs(flow.initial_state(), 0.0, ds);
  const double expected[6] = {2.0, 0.0, 12.0, 0.0, 6.0, 0.0};
  for (int i = 0; i < 6; ++i) CHECK(ds.z[i] == doctest::Approx(expected[i]));
  CHECK(ds.mu.empty());

  // Any consensus state: Laplacian term still zero.
  FlowState s = flow.initial_state();
  for (int i = 0; i < 3; ++i) {
    s.z[i] = 1.7;
    s.z[3 + i] = -0.4;
  }
  flow.rhs(s, 0.0, ds);
  std::vector<double> g;
  cost->total_gradient({1.7, -0.4}, g);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> gi;
    cost->agents[i]->gradient({1.7, -0.4}, gi);
    CHECK(ds.z[i] == doctest::Approx(-gi[0]));
    CHECK(ds.z[3 + i] == doctest::Approx(-gi[1]));
  }
}

TEST_CASE("multiplier derivative vanishes on the constraint set") {
  const Problem p = build_line3();
  auto layout = std::make_shared<const AggregateLayout>(
      aggregate_full(build_incidence(p.topology), 2));
  auto cost = std::make_shared<const SeparableCost>(p.cost);

  MethodSpec spec;
  spec.method = Method::I;
  spec.layout = layout;
  Flow flow(spec, cost);

  FlowState s = flow.initial_state();
  for (int i = 0; i < 3; ++i) {
    s.z[i] = 2.5;
    s.z[3 + i] = 0.75;
  }
  FlowState ds;
  flow.rhs(s, 0.0, ds);
  for (double v : ds.mu) CHECK(v == 0.0);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> gi;
    cost->agents[i]->gradient({2.5, 0.75}, gi);
    CHECK(ds.z[i] == doctest::Approx(-gi[0]));
    CHECK(ds.z[3 + i] == doctest::Approx(-gi[1]));
  }
}

TEST_CASE("flow derivatives match the dense aggregate formulas") {
  std::mt19937 rng(127);
  std::uniform_real_distribution<double> gain(0.1, 3.0);
  std::uniform_real_distribution<double> time(0.0, 20.0);

  for (int trial = 0; trial < 40; ++trial) {
    const RandomProblem p = random_problem(rng);
    const auto layout = trial % 2 == 0 ? make_full(p) : make_reduced(p, &rng);
    const DenseModel model(*p.cost, *layout);

    GainSchedule gains;
    gains.k_g = gain(rng);
    gains.k_p = gain(rng);
    gains.k_ip = gain(rng);
    if (trial % 3 == 0) gains.fading = FadingGain{gain(rng), 0.1 * gain(rng)};

    for (Method method : {Method::P, Method::I, Method::PI}) {
      MethodSpec spec;
      spec.method = method;
      spec.gains = gains;
      spec.layout = layout;
      Flow flow(spec, p.cost);

      const FlowState s = random_state(rng, flow);
      const double t = time(rng);
      FlowState ds;
      flow.rhs(s, t, ds);

      const Eigen::VectorXd z = to_vec(s.z);
      const double kg = gains.k_g_at(t);
      Eigen::VectorXd dz = -kg * model.grad(z);
      if (method != Method::I) dz -= gains.k_p * (model.lap * z);
      if (method != Method::P) dz -= gains.k_ip * (model.d * to_vec(s.mu));

      for (int i = 0; i < layout->z_dim; ++i)
        CHECK(ds.z[i] == doctest::Approx(dz(i)).epsilon(1e-12));
      if (method != Method::P) {
        const Eigen::VectorXd dmu = gains.k_ip * (model.d.transpose() * z);
        for (int i = 0; i < layout->mu_dim; ++i)
          CHECK(ds.mu[i] == doctest::Approx(dmu(i)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Laplacian-constraint flow matches its dense formula") {
  std::mt19937 rng(311);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomProblem p = random_problem(rng);
    const auto layout = make_full(p);
    const DenseModel model(*p.cost, *layout);

    MethodSpec spec;
    spec.method = Method::PIL;
    spec.layout = layout;
    Flow flow(spec, p.cost);

    const FlowState s = random_state(rng, flow);
    REQUIRE(s.mu.size() == static_cast<size_t>(layout->z_dim));
    FlowState ds;
    flow.rhs(s, 0.0, ds);

    const Eigen::VectorXd z = to_vec(s.z), mu = to_vec(s.mu);
    const Eigen::VectorXd dz = -model.grad(z) - model.lap * z - model.lap * mu;
    const Eigen::VectorXd dmu = model.lap * z;
    for (int i = 0; i < layout->z_dim; ++i) {
      CHECK(ds.z[i] == doctest::Approx(dz(i)).epsilon(1e-12));
      CHECK(ds.mu[i] == doctest::Approx(dmu(i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-gain combined flow reduces exactly to its parts") {
  std::mt19937 rng(941);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomProblem p = random_problem(rng);
    const auto layout = trial % 2 == 0 ? make_full(p) : make_reduced(p);

    GainSchedule gains;
    gains.k_g = 1.3;
    gains.k_p = 0.7;
    gains.k_ip = 0.9;

    // k_P = 0: the combined derivative equals the multiplier-only one.
    {
      MethodSpec pi_spec{Method::PI, gains, layout};
      pi_spec.gains.k_p = 0.0;
      MethodSpec i_spec{Method::I, pi_spec.gains, layout};
      Flow pi(pi_spec, p.cost), ionly(i_spec, p.cost);
      const FlowState s = random_state(rng, pi);
      FlowState da, db;
      pi.rhs(s, 0.5, da);
      ionly.rhs(s, 0.5, db);
      for (size_t i = 0; i < da.z.size(); ++i) CHECK(da.z[i] == db.z[i]);
      for (size_t i = 0; i < da.mu.size(); ++i) CHECK(da.mu[i] == db.mu[i]);
    }

    // k_I' = 0: the z derivative equals the consensus-only one.
    {
      MethodSpec pi_spec{Method::PI, gains, layout};
      pi_spec.gains.k_ip = 0.0;
      MethodSpec p_spec{Method::P, pi_spec.gains, layout};
      Flow pi(pi_spec, p.cost), ponly(p_spec, p.cost);
      FlowState s = random_state(rng, pi);
      FlowState da, db;
      pi.rhs(s, 0.5, da);
      FlowState sp = s;
      sp.mu.clear();
      ponly.rhs(sp, 0.5, db);
      for (size_t i = 0; i < da.z.size(); ++i) CHECK(da.z[i] == db.z[i]);
      for (double v : da.mu) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("per-agent multiplier views are antisymmetric") {
  const Problem p = build_ring20();
  auto layout = std::make_shared<const AggregateLayout>(
      aggregate_reduced(p.topology, p.dependents));
  MethodSpec spec;
  spec.method = Method::PI;
  spec.layout = layout;
  Flow flow(spec, std::make_shared<const SeparableCost>(p.cost));

  std::mt19937 rng(59);
  const FlowState s = random_state(rng, flow);
  int checked = 0;
  for (int k = 0; k < p.topology.edge_count(); ++k) {
    const Edge e = p.topology.edges[k];
    for (int j = 0; j < 20; ++j) {
      if (layout->mu_index(k, j) < 0) continue;
      const double head_view = multiplier_view(*layout, s, e.head, k, j);
      const double tail_view = multiplier_view(*layout, s, e.tail, k, j);
      CHECK(head_view == -tail_view);
      ++checked;
    }
  }
  CHECK(checked == layout->mu_dim);

  // Edge 0 joins agents 0 and 1; agent 5 holds no view of it.
  CHECK_THROWS_AS(multiplier_view(*layout, s, 5, 0, 0), ValidationError);
  // Variable 10's block does not contain edge 0.
  CHECK(layout->mu_index(0, 10) < 0);
  CHECK_THROWS_AS(multiplier_view(*layout, s, 0, 0, 10), ValidationError);
  // A consensus-only state carries no multipliers at all.
  MethodSpec p_spec;
  p_spec.method = Method::P;
  p_spec.layout = layout;
  Flow p_flow(p_spec, std::make_shared<const SeparableCost>(p.cost));
  CHECK_THROWS_AS(multiplier_view(*layout, p_flow.initial_state(), 1, 0, 0),
                  ValidationError);
}

TEST_CASE("per-message communication counts") {
  const Problem line = build_line3();
  auto line_full = std::make_shared<const AggregateLayout>(
      aggregate_full(build_incidence(line.topology), 2));
  CHECK(count_communication(Method::PI, *line_full) == std::vector<int>{2, 2});
  CHECK(count_communication(Method::P, *line_full) == std::vector<int>{2, 2});
  CHECK(count_communication(Method::I, *line_full) == std::vector<int>{2, 2});
  CHECK(count_communication(Method::PIL, *line_full) == std::vector<int>{4, 4});

  const Problem ring = build_ring20();
  auto ring_reduced = std::make_shared<const AggregateLayout>(
      aggregate_reduced(ring.topology, ring.dependents));
  const auto counts = count_communication(Method::PI, *ring_reduced);
  REQUIRE(counts.size() == 20);
  for (int c : counts) CHECK(c == 2);  // adjacent agents co-track two variables

  auto ring_full = std::make_shared<const AggregateLayout>(
      aggregate_full(build_incidence(ring.topology), 20));
  for (int c : count_communication(Method::PI, *ring_full)) CHECK(c == 20);
  for (int c : count_communication(Method::PIL, *ring_full)) CHECK(c == 40);

  CHECK_THROWS_AS(count_communication(Method::PIL, *ring_reduced), ValidationError);
}

TEST_CASE("method specs are validated at the run level") {
  const Problem p = build_line3();
  auto full = std::make_shared<const AggregateLayout>(
      aggregate_full(build_incidence(p.topology), 2));
  auto reduced = std::make_shared<const AggregateLayout>(
      aggregate_reduced(p.topology, p.dependents));

  MethodSpec spec;
  spec.layout = full;

  spec.method = Method::P;
  spec.gains.k_p = 0.0;
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.gains.k_p = 1.0;
  CHECK_NOTHROW(validate_method_spec(spec));

  spec.method = Method::I;
  spec.gains.k_ip = 0.0;
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.gains.k_ip = 1.0;
  CHECK_NOTHROW(validate_method_spec(spec));

  spec.method = Method::PI;
  spec.gains.k_p = 0.0;
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.gains.k_p = 1.0;
  spec.gains.k_ip = 0.0;
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.gains.k_ip = 1.0;
  CHECK_NOTHROW(validate_method_spec(spec));

  spec.method = Method::PIL;
  CHECK_NOTHROW(validate_method_spec(spec));
  spec.layout = reduced;
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.layout = full;
  spec.gains.k_p = 2.0;
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.gains.k_p = 1.0;
  spec.gains.fading = FadingGain{};
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.gains.fading.reset();

  spec.method = Method::P;
  spec.gains.k_g = -1.0;
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);
  spec.gains.k_g = 1.0;
  spec.gains.fading = FadingGain{0.0, 0.1};
  CHECK_THROWS_AS(validate_method_spec(spec), ValidationError);

  CHECK(parse_method("pi") == Method::PI);
  CHECK(parse_method("pil") == Method::PIL);
  CHECK_THROWS_AS(parse_method("PI"), ValidationError);
  CHECK_THROWS_AS(parse_method("laplacian"), ValidationError);
}

TEST_CASE("flow construction rejects inconsistent inputs") {
  const Problem line = build_line3();
  auto layout = std::make_shared<const AggregateLayout>(
      aggregate_full(build_incidence(line.topology), 2));
  auto cost = std::make_shared<const SeparableCost>(line.cost);

  MethodSpec spec;
  spec.method = Method::PI;
  CHECK_THROWS_AS(Flow(spec, cost), ValidationError);  // no layout
  spec.layout = layout;
  CHECK_THROWS_AS(Flow(spec, nullptr), ValidationError);

  // Agent count mismatch: a ring layout under the path cost.
  const Problem ring = build_ring20();
  auto ring_layout = std::make_shared<const AggregateLayout>(
      aggregate_reduced(ring.topology, ring.dependents));
  MethodSpec mismatch;
  mismatch.method = Method::PI;
  mismatch.layout = ring_layout;
  CHECK_THROWS_AS(Flow(mismatch, cost), ValidationError);

  // A reduced layout that fails to track a dependency.
  std::vector<std::vector<int>> too_small = ring.dependents;
  too_small[0] = {0};  // agents 1 and 19 depend on variable 0 but are dropped
  auto partial = std::make_shared<const AggregateLayout>(
      aggregate_reduced(ring.topology, too_small));
  MethodSpec rspec;
  rspec.method = Method::PI;
  rspec.layout = partial;
  CHECK_THROWS_AS(Flow(rspec, std::make_shared<const SeparableCost>(ring.cost)),
                  ValidationError);

  // Laplacian-constraint flow refuses reduced layouts outright.
  MethodSpec pil;
  pil.method = Method::PIL;
  pil.layout = ring_layout;
  CHECK_THROWS_AS(Flow(pil, std::make_shared<const SeparableCost>(ring.cost)),
                  ValidationError);

  // State and initial-condition dimension checks.
  Flow flow(spec, cost);
  CHECK_THROWS_AS(flow.initial_state({1.0, 2.0}), ValidationError);
  FlowState bad = flow.initial_state();
  bad.mu.resize(1);
  FlowState ds;
  CHECK_THROWS_AS(flow.rhs(bad, 0.0, ds), ValidationError);
  FlowState short_z = flow.initial_state();
  short_z.z.pop_back();
  CHECK_THROWS_AS(flow.rhs(short_z, 0.0, ds), ValidationError);
}
