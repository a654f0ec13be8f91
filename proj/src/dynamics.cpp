#include "gradflow/dynamics.hpp"

#include <algorithm>
#include <string>

namespace gradflow {
namespace {

size_t mu_size(Method method, const AggregateLayout& layout) {
  switch (method) {
    case Method::P:
      return 0;
    case Method::I:
    case Method::PI:
      return static_cast<size_t>(layout.mu_dim);
    case Method::PIL:
      return static_cast<size_t>(layout.z_dim);
  }
  throw ValidationError("flow: unknown method");
}

void validate_gains(const GainSchedule& gains) {
  if (gains.fading) {
    if (gains.fading->a <= 0.0 || gains.fading->b < 0.0)
      throw ValidationError("gains: fading profile requires a > 0 and b >= 0");
  } else if (gains.k_g <= 0.0) {
    throw ValidationError("gains: k_G must be positive");
  }
  if (gains.k_p < 0.0) throw ValidationError("gains: k_P must be nonnegative");
  if (gains.k_ip < 0.0) throw ValidationError("gains: k_I' must be nonnegative");
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "p") return Method::P;
  if (name == "i") return Method::I;
  if (name == "pi") return Method::PI;
  if (name == "pil") return Method::PIL;
  throw ValidationError("unknown method '" + name + "' (expected p, i, pi, or pil)");
}

const char* method_name(Method method) {
  switch (method) {
    case Method::P:
      return "p";
    case Method::I:
      return "i";
    case Method::PI:
      return "pi";
    case Method::PIL:
      return "pil";
  }
  return "?";
}

void validate_method_spec(const MethodSpec& spec) {
  if (!spec.layout) throw ValidationError("method spec: layout is required");
  validate_gains(spec.gains);
  const GainSchedule& g = spec.gains;
  switch (spec.method) {
    case Method::P:
      if (g.k_p <= 0.0) throw ValidationError("method p requires k_P > 0");
      break;
    case Method::I:
      if (g.k_ip <= 0.0) throw ValidationError("method i requires k_I' > 0");
      break;
    case Method::PI:
      if (g.k_p <= 0.0 || g.k_ip <= 0.0)
        throw ValidationError("method pi requires k_P > 0 and k_I' > 0");
      break;
    case Method::PIL:
      if (spec.layout->mode != LayoutMode::full)
        throw ValidationError("method pil requires the full layout");
      if (g.fading || g.k_g != 1.0 || g.k_p != 1.0 || g.k_ip != 1.0)
        throw ValidationError("method pil admits only the default unit gains");
      break;
  }
}

Flow::Flow(MethodSpec spec, std::shared_ptr<const SeparableCost> cost)
    : spec_(std::move(spec)), cost_(std::move(cost)) {
  if (!spec_.layout) throw ValidationError("flow: layout is required");
  if (!cost_) throw ValidationError("flow: cost is required");
  cost_->validate();
  validate_gains(spec_.gains);

  const AggregateLayout& layout = *spec_.layout;
  if (cost_->variable_count != layout.variable_count)
    throw ValidationError("flow: cost and layout disagree on the variable count");
  if (cost_->agent_count() != layout.agent_count)
    throw ValidationError("flow: cost and layout disagree on the agent count");
  if (spec_.method == Method::PIL && layout.mode != LayoutMode::full)
    throw ValidationError("method pil requires the full layout");

  agent_slots_.resize(cost_->agent_count());
  size_t max_dep = 1;
  for (int i = 0; i < cost_->agent_count(); ++i) {
    const auto& dep = cost_->dependency(i);
    agent_slots_[i].resize(dep.size());
    for (size_t p = 0; p < dep.size(); ++p) {
      const int slot = layout.z_index(i, dep[p]);
      if (slot < 0)
        throw ValidationError("flow: layout does not track agent " + std::to_string(i) +
                              "'s dependency on variable " + std::to_string(dep[p]));
      agent_slots_[i][p] = slot;
    }
    max_dep = std::max(max_dep, dep.size());
  }
  x_dep_.resize(max_dep);
  g_dep_.resize(max_dep);
}

FlowState Flow::initial_state() const {
  FlowState s;
  s.z.assign(spec_.layout->z_dim, 0.0);
  s.mu.assign(mu_size(spec_.method, *spec_.layout), 0.0);
  return s;
}

FlowState Flow::initial_state(const std::vector<double>& z0) const {
  if (static_cast<int>(z0.size()) != spec_.layout->z_dim)
    throw ValidationError("flow: initial z must have " + std::to_string(spec_.layout->z_dim) +
                          " entries, got " + std::to_string(z0.size()));
  FlowState s = initial_state();
  s.z = z0;
  return s;
}

void Flow::rhs(const FlowState& state, double t, FlowState& ds) const {
  const AggregateLayout& layout = *spec_.layout;
  const size_t expected_mu = mu_size(spec_.method, layout);
  if (static_cast<int>(state.z.size()) != layout.z_dim)
    throw ValidationError("flow: state z dimension mismatch");
  if (state.mu.size() != expected_mu)
    throw ValidationError("flow: state mu dimension mismatch");

  ds.z.assign(layout.z_dim, 0.0);
  ds.mu.assign(expected_mu, 0.0);

  // Gradient term: each agent contributes only at its own tracked copies.
  const double kg = spec_.method == Method::PIL ? 1.0 : spec_.gains.k_g_at(t);
  for (int i = 0; i < cost_->agent_count(); ++i) {
    const auto& slots = agent_slots_[i];
    for (size_t p = 0; p < slots.size(); ++p) x_dep_[p] = state.z[slots[p]];
    cost_->agents[i]->gradient_dep(x_dep_.data(), g_dep_.data());
    for (size_t p = 0; p < slots.size(); ++p) ds.z[slots[p]] -= kg * g_dep_[p];
  }

  const bool p_term = (spec_.method == Method::P || spec_.method == Method::PI) &&
                      spec_.gains.k_p != 0.0;
  const bool i_term = (spec_.method == Method::I || spec_.method == Method::PI) &&
                      spec_.gains.k_ip != 0.0;

  if (p_term) {
    // dz -= k_P L z, accumulated edge by edge inside each block.
    const double kp = spec_.gains.k_p;
    for (const VariableBlock& b : layout.blocks) {
      const double* z = state.z.data() + b.z_offset;
      double* dz = ds.z.data() + b.z_offset;
      for (const Edge& e : b.edges) {
        const int ph = b.node_pos[e.head], pt = b.node_pos[e.tail];
        const double flow = kp * (z[ph] - z[pt]);
        dz[ph] -= flow;
        dz[pt] += flow;
      }
    }
  }

  if (i_term) {
    // dz -= k_I' D mu; dmu = k_I' D^T z.
    const double kip = spec_.gains.k_ip;
    for (const VariableBlock& b : layout.blocks) {
      const double* z = state.z.data() + b.z_offset;
      double* dz = ds.z.data() + b.z_offset;
      const double* mu = state.mu.data() + b.mu_offset;
      double* dmu = ds.mu.data() + b.mu_offset;
      for (size_t k = 0; k < b.edges.size(); ++k) {
        const Edge& e = b.edges[k];
        const int ph = b.node_pos[e.head], pt = b.node_pos[e.tail];
        dz[ph] -= kip * mu[k];
        dz[pt] += kip * mu[k];
        dmu[k] = kip * (z[ph] - z[pt]);
      }
    }
  }

  if (spec_.method == Method::PIL) {
    // dz -= L z + L mu; dmu = L z, with mu living on the node copies.
    for (const VariableBlock& b : layout.blocks) {
      const double* z = state.z.data() + b.z_offset;
      double* dz = ds.z.data() + b.z_offset;
      const double* mu = state.mu.data() + b.z_offset;
      double* dmu = ds.mu.data() + b.z_offset;
      for (const Edge& e : b.edges) {
        const int ph = b.node_pos[e.head], pt = b.node_pos[e.tail];
        const double zdiff = z[ph] - z[pt];
        const double mudiff = mu[ph] - mu[pt];
        dz[ph] -= zdiff + mudiff;
        dz[pt] += zdiff + mudiff;
        dmu[ph] += zdiff;
        dmu[pt] -= zdiff;
      }
    }
  }
}

double multiplier_view(const AggregateLayout& layout, const FlowState& state, int agent,
                       int edge_id, int variable) {
  if (variable < 0 || variable >= layout.variable_count)
    throw ValidationError("multiplier view: variable index out of range");
  if (edge_id < 0 || edge_id >= layout.base.edge_count())
    throw ValidationError("multiplier view: edge index out of range");
  const int slot = layout.mu_index(edge_id, variable);
  if (slot < 0)
    throw ValidationError("multiplier view: edge is not part of the variable's block");
  if (static_cast<size_t>(slot) >= state.mu.size())
    throw ValidationError("multiplier view: state carries no edge multipliers");
  const Edge& e = layout.base.edges[edge_id];
  if (agent == e.head) return state.mu[slot];
  if (agent == e.tail) return -state.mu[slot];
  throw ValidationError("multiplier view: agent " + std::to_string(agent) +
                        " is not an endpoint of edge " + std::to_string(edge_id));
}

std::vector<int> count_communication(Method method, const AggregateLayout& layout) {
  if (method == Method::PIL && layout.mode != LayoutMode::full)
    throw ValidationError("method pil requires the full layout");
  std::vector<int> per_edge(layout.base.edge_count(), 0);
  for (const VariableBlock& b : layout.blocks) {
    for (int edge_id : b.edge_ids) per_edge[edge_id] += 1;
  }
  if (method == Method::PIL) {
    for (int& c : per_edge) c *= 2;
  }
  return per_edge;
}

}  // namespace gradflow
