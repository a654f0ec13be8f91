#include "gradflow/layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace gradflow {
namespace {

void check_dim(const std::vector<double>& v, int dim, const char* what) {
  if (static_cast<int>(v.size()) != dim)
    throw ValidationError(std::string(what) + ": got size " + std::to_string(v.size()) +
                          ", expected " + std::to_string(dim));
}

// Connected components of block nodes under the block's induced edges.
std::vector<std::vector<int>> block_components(const VariableBlock& b, int agent_count) {
  std::vector<std::vector<int>> adj(b.size());
  for (const Edge& e : b.edges) {
    adj[b.node_pos[e.tail]].push_back(b.node_pos[e.head]);
    adj[b.node_pos[e.head]].push_back(b.node_pos[e.tail]);
  }
  std::vector<char> visited(b.size(), 0);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < b.size(); ++s) {
    if (visited[s]) continue;
    std::vector<int> comp, stack{s};
    visited[s] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(b.nodes[v]);
      for (int u : adj[v]) {
        if (!visited[u]) {
          visited[u] = 1;
          stack.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  (void)agent_count;
  return comps;
}

}  // namespace

void AggregateLayout::apply_incidence_transpose(const std::vector<double>& z,
                                                std::vector<double>& out) const {
  check_dim(z, z_dim, "apply_incidence_transpose");
  out.resize(mu_dim);
  for (const VariableBlock& b : blocks) {
    const double* zb = z.data() + b.z_offset;
    double* ob = out.data() + b.mu_offset;
    for (int k = 0; k < b.edge_count(); ++k) {
      ob[k] = zb[b.node_pos[b.edges[k].head]] - zb[b.node_pos[b.edges[k].tail]];
    }
  }
}

void AggregateLayout::apply_incidence(const std::vector<double>& w,
                                      std::vector<double>& out) const {
  check_dim(w, mu_dim, "apply_incidence");
  out.assign(z_dim, 0.0);
  for (const VariableBlock& b : blocks) {
    const double* wb = w.data() + b.mu_offset;
    double* ob = out.data() + b.z_offset;
    for (int k = 0; k < b.edge_count(); ++k) {
      ob[b.node_pos[b.edges[k].head]] += wb[k];
      ob[b.node_pos[b.edges[k].tail]] -= wb[k];
    }
  }
}

void AggregateLayout::apply_laplacian(const std::vector<double>& z,
                                      std::vector<double>& out) const {
  check_dim(z, z_dim, "apply_laplacian");
  out.assign(z_dim, 0.0);
  for (const VariableBlock& b : blocks) {
    const double* zb = z.data() + b.z_offset;
    double* ob = out.data() + b.z_offset;
    for (int k = 0; k < b.edge_count(); ++k) {
      const int h = b.node_pos[b.edges[k].head];
      const int t = b.node_pos[b.edges[k].tail];
      const double diff = zb[h] - zb[t];
      ob[h] += diff;
      ob[t] -= diff;
    }
  }
}

std::vector<std::vector<double>> AggregateLayout::incidence_dense() const {
  std::vector<std::vector<double>> d(z_dim, std::vector<double>(mu_dim, 0.0));
  for (const VariableBlock& b : blocks) {
    for (int k = 0; k < b.edge_count(); ++k) {
      d[b.z_offset + b.node_pos[b.edges[k].head]][b.mu_offset + k] = 1.0;
      d[b.z_offset + b.node_pos[b.edges[k].tail]][b.mu_offset + k] = -1.0;
    }
  }
  return d;
}

AggregateLayout aggregate_full(const EdgeMatrixSet& ems, int variable_count) {
  if (variable_count < 1)
    throw ValidationError("aggregate_full: variable count must be positive");
  AggregateLayout layout;
  layout.mode = LayoutMode::full;
  layout.agent_count = ems.node_count;
  layout.variable_count = variable_count;
  layout.base = Topology{ems.node_count, ems.edges};

  VariableBlock proto;
  proto.edges = ems.edges;
  proto.nodes.resize(ems.node_count);
  proto.node_pos.resize(ems.node_count);
  for (int i = 0; i < ems.node_count; ++i) proto.nodes[i] = proto.node_pos[i] = i;
  proto.edge_ids.resize(ems.edges.size());
  proto.edge_pos.resize(ems.edges.size());
  for (size_t k = 0; k < ems.edges.size(); ++k)
    proto.edge_ids[k] = proto.edge_pos[k] = static_cast<int>(k);

  layout.blocks.assign(variable_count, proto);
  for (int j = 0; j < variable_count; ++j) {
    layout.blocks[j].z_offset = j * ems.node_count;
    layout.blocks[j].mu_offset = j * ems.edge_count();
  }
  layout.z_dim = variable_count * ems.node_count;
  layout.mu_dim = variable_count * ems.edge_count();
  return layout;
}

AggregateLayout aggregate_reduced(const Topology& g,
                                  const std::vector<std::vector<int>>& dependents) {
  validate_topology(g);
  if (!is_connected(g))
    throw ValidationError("aggregate_reduced: base graph must be connected");
  if (dependents.empty())
    throw ValidationError("aggregate_reduced: need at least one variable");

  AggregateLayout layout;
  layout.mode = LayoutMode::reduced;
  layout.agent_count = g.node_count;
  layout.variable_count = static_cast<int>(dependents.size());
  layout.base = g;

  int z_at = 0, mu_at = 0;
  for (size_t j = 0; j < dependents.size(); ++j) {
    if (dependents[j].empty())
      throw ValidationError("aggregate_reduced: variable " + std::to_string(j) +
                            " has no tracking agents");
    VariableBlock b;
    std::set<int> uniq;
    for (int v : dependents[j]) {
      if (v < 0 || v >= g.node_count)
        throw ValidationError("aggregate_reduced: variable " + std::to_string(j) +
                              " tracks node " + std::to_string(v) + " outside [0," +
                              std::to_string(g.node_count) + ")");
      uniq.insert(v);
    }
    b.nodes.assign(uniq.begin(), uniq.end());
    b.node_pos.assign(g.node_count, -1);
    for (int p = 0; p < b.size(); ++p) b.node_pos[b.nodes[p]] = p;

    b.edge_pos.assign(g.edge_count(), -1);
    for (int k = 0; k < g.edge_count(); ++k) {
      const Edge& e = g.edges[k];
      if (b.node_pos[e.tail] >= 0 && b.node_pos[e.head] >= 0) {
        b.edge_pos[k] = b.edge_count();
        b.edge_ids.push_back(k);
        b.edges.push_back(e);
      }
    }

    auto comps = block_components(b, g.node_count);
    if (comps.size() != 1) {
      std::string msg = "aggregate_reduced: variable " + std::to_string(j) +
                        " induces a disconnected subgraph; components ";
      for (const auto& comp : comps) {
        msg += "{";
        for (size_t i = 0; i < comp.size(); ++i) {
          if (i > 0) msg += ",";
          msg += std::to_string(comp[i]);
        }
        msg += "}";
      }
      throw ValidationError(msg);
    }

    b.z_offset = z_at;
    b.mu_offset = mu_at;
    z_at += b.size();
    mu_at += b.edge_count();
    layout.blocks.push_back(std::move(b));
  }
  layout.z_dim = z_at;
  layout.mu_dim = mu_at;
  return layout;
}

double consensus_residual(const AggregateLayout& layout, const std::vector<double>& z) {
  check_dim(z, layout.z_dim, "consensus_residual");
  double sq = 0.0;
  for (const VariableBlock& b : layout.blocks) {
    const double* zb = z.data() + b.z_offset;
    for (int k = 0; k < b.edge_count(); ++k) {
      const double diff = zb[b.node_pos[b.edges[k].head]] - zb[b.node_pos[b.edges[k].tail]];
      sq += diff * diff;
    }
  }
  return std::sqrt(sq);
}

}  // namespace gradflow
