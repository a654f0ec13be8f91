#pragma once

#include <vector>

#include "gradflow/errors.hpp"

namespace gradflow {

/// Oriented edge of an undirected graph. The orientation is an arbitrary
/// bookkeeping choice that fixes the sign convention of the incidence matrix;
/// built-in constructors orient edges tail < head for reproducibility.
struct Edge {
  int tail = 0;
  int head = 0;
};

/// Undirected graph over nodes 0..node_count-1 with an oriented edge list.
/// Valid topologies are simple (no self-loops, no duplicate undirected edges).
struct Topology {
  int node_count = 0;
  std::vector<Edge> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Path 0-1-...-n-1 with edges (i, i+1).
Topology make_path(int node_count);

/// Cycle 0-1-...-n-1-0; the closing edge is oriented (0, n-1).
Topology make_ring(int node_count);

/// Throws ValidationError on out-of-range indices, self-loops, or duplicate
/// undirected edges. Does not require connectivity.
void validate_topology(const Topology& g);

/// Connected components of the undirected graph; each component is sorted
/// ascending and components are ordered by their smallest node.
std::vector<std::vector<int>> connected_components(const Topology& g);

bool is_connected(const Topology& g);

/// Incidence/Laplacian pair in sparse column-list form: the edge list *is* the
/// incidence matrix (column k has +1 at edges[k].head and -1 at edges[k].tail),
/// and L = D D^T is applied edge-by-edge, never materialized.
struct EdgeMatrixSet {
  int node_count = 0;
  std::vector<Edge> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }

  /// out[k] = v[head_k] - v[tail_k], i.e. D^T v.
  void apply_incidence_transpose(const std::vector<double>& v,
                                 std::vector<double>& out) const;

  /// out[i] = sum_k D[i,k] w[k], i.e. D w.
  void apply_incidence(const std::vector<double>& w,
                       std::vector<double>& out) const;

  /// out = D D^T v.
  void apply_laplacian(const std::vector<double>& v,
                       std::vector<double>& out) const;

  /// Dense N x M incidence matrix (for small graphs and validation).
  std::vector<std::vector<double>> incidence_dense() const;

  /// Dense N x N Laplacian (for small graphs and validation).
  std::vector<std::vector<double>> laplacian_dense() const;
};

/// Validates the topology, requires it connected, and wraps it as matrices.
/// The error for a disconnected graph lists the components.
EdgeMatrixSet build_incidence(const Topology& g);

/// BFS spanning tree (rooted at node 0, neighbors visited in ascending order).
/// The result has node_count-1 edges drawn from g with their orientations kept.
Topology spanning_tree(const Topology& g);

/// Smallest-effort superset of node_set whose induced subgraph in g is
/// connected: components are joined greedily along BFS shortest paths in g.
/// The result is sorted ascending; minimality is not guaranteed.
std::vector<int> augment_to_connected(const Topology& g,
                                      const std::vector<int>& node_set);

}  // namespace gradflow
