#pragma once

#include <vector>

#include "gradflow/graph.hpp"

namespace gradflow {

enum class LayoutMode { full, reduced };

/// One variable's slice of the aggregate state: the agents that track the
/// variable, the communication edges induced among them, and the offsets of
/// the slice inside the flat z / mu vectors.
struct VariableBlock {
  std::vector<int> nodes;     // tracking agents, ascending
  std::vector<Edge> edges;    // induced edges (endpoints are agent ids)
  std::vector<int> edge_ids;  // positions of those edges in the base edge list
  std::vector<int> node_pos;  // agent id -> index into nodes, -1 if untracked
  std::vector<int> edge_pos;  // base edge id -> index into edges, -1 if absent
  int z_offset = 0;
  int mu_offset = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Variable-major aggregate layout: z = [z_1; ...; z_n] where z_j stacks every
/// tracked copy of variable j, and mu stacks the per-variable edge multipliers
/// the same way. In full mode every block spans the whole graph (the aggregate
/// incidence is I_n (x) D); in reduced mode block j spans the induced subgraph
/// of the agents depending on variable j, each of which must be connected.
struct AggregateLayout {
  LayoutMode mode = LayoutMode::full;
  int agent_count = 0;
  int variable_count = 0;
  int z_dim = 0;
  int mu_dim = 0;
  Topology base;
  std::vector<VariableBlock> blocks;

  /// Flat position of agent i's copy of variable j, or -1 if untracked.
  int z_index(int agent, int variable) const {
    const VariableBlock& b = blocks[variable];
    const int p = b.node_pos[agent];
    return p < 0 ? -1 : b.z_offset + p;
  }

  /// Flat position of base edge k's multiplier for variable j, or -1.
  int mu_index(int edge_id, int variable) const {
    const VariableBlock& b = blocks[variable];
    const int p = b.edge_pos[edge_id];
    return p < 0 ? -1 : b.mu_offset + p;
  }

  bool tracks(int agent, int variable) const {
    return blocks[variable].node_pos[agent] >= 0;
  }

  /// out = D^T z blockwise: out[mu slot] = z[head copy] - z[tail copy].
  void apply_incidence_transpose(const std::vector<double>& z,
                                 std::vector<double>& out) const;

  /// out = D w blockwise (adjoint of the above).
  void apply_incidence(const std::vector<double>& w, std::vector<double>& out) const;

  /// out = D D^T z blockwise.
  void apply_laplacian(const std::vector<double>& z, std::vector<double>& out) const;

  /// Dense z_dim x mu_dim aggregate incidence (for small layouts and tests).
  std::vector<std::vector<double>> incidence_dense() const;
};

/// Full layout: every agent tracks every one of the n variables.
AggregateLayout aggregate_full(const EdgeMatrixSet& ems, int variable_count);

/// Reduced layout from per-variable tracking sets (dependents[j] = agents that
/// track variable j). Throws ValidationError if a set is empty or its induced
/// subgraph is disconnected (use augment_to_connected on the set first).
AggregateLayout aggregate_reduced(const Topology& g,
                                  const std::vector<std::vector<int>>& dependents);

/// || D^T z ||_2: zero exactly when every variable is in per-block consensus.
double consensus_residual(const AggregateLayout& layout, const std::vector<double>& z);

}  // namespace gradflow
