#include "gradflow/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <utility>

namespace gradflow {
namespace {

std::string component_list(const std::vector<std::vector<int>>& comps) {
  std::string out;
  for (const auto& comp : comps) {
    out += "{";
    for (size_t i = 0; i < comp.size(); ++i) {
      if (i > 0) out += ",";
      out += std::to_string(comp[i]);
    }
    out += "}";
  }
  return out;
}

// Neighbor lists sorted ascending so every traversal is deterministic.
std::vector<std::vector<std::pair<int, int>>> adjacency(const Topology& g) {
  std::vector<std::vector<std::pair<int, int>>> adj(g.node_count);
  for (int k = 0; k < g.edge_count(); ++k) {
    adj[g.edges[k].tail].push_back({g.edges[k].head, k});
    adj[g.edges[k].head].push_back({g.edges[k].tail, k});
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

}  // namespace

Topology make_path(int node_count) {
  if (node_count < 1) throw ValidationError("make_path: node_count must be positive");
  Topology g;
  g.node_count = node_count;
  for (int i = 0; i + 1 < node_count; ++i) g.edges.push_back({i, i + 1});
  return g;
}

Topology make_ring(int node_count) {
  if (node_count < 3) throw ValidationError("make_ring: need at least 3 nodes");
  Topology g = make_path(node_count);
  g.edges.push_back({0, node_count - 1});
  return g;
}

void validate_topology(const Topology& g) {
  if (g.node_count <= 0) throw ValidationError("topology: node_count must be positive");
  std::set<std::pair<int, int>> seen;
  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges[k];
    if (e.tail < 0 || e.tail >= g.node_count || e.head < 0 || e.head >= g.node_count) {
      throw ValidationError("topology: edge " + std::to_string(k) + " (" +
                            std::to_string(e.tail) + "," + std::to_string(e.head) +
                            ") has a node index outside [0," +
                            std::to_string(g.node_count) + ")");
    }
    if (e.tail == e.head) {
      throw ValidationError("topology: edge " + std::to_string(k) + " is a self-loop at node " +
                            std::to_string(e.tail));
    }
    auto key = std::minmax(e.tail, e.head);
    if (!seen.insert(key).second) {
      throw ValidationError("topology: duplicate undirected edge (" +
                            std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    }
  }
}

std::vector<std::vector<int>> connected_components(const Topology& g) {
  auto adj = adjacency(g);
  std::vector<char> visited(g.node_count, 0);
  std::vector<std::vector<int>> comps;
  for (int start = 0; start < g.node_count; ++start) {
    if (visited[start]) continue;
    std::vector<int> comp;
    std::deque<int> queue{start};
    visited[start] = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (auto [u, k] : adj[v]) {
        if (!visited[u]) {
          visited[u] = 1;
          queue.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

bool is_connected(const Topology& g) { return connected_components(g).size() == 1; }

void EdgeMatrixSet::apply_incidence_transpose(const std::vector<double>& v,
                                              std::vector<double>& out) const {
  if (static_cast<int>(v.size()) != node_count)
    throw ValidationError("apply_incidence_transpose: vector size != node count");
  out.resize(edges.size());
  for (size_t k = 0; k < edges.size(); ++k) out[k] = v[edges[k].head] - v[edges[k].tail];
}

void EdgeMatrixSet::apply_incidence(const std::vector<double>& w,
                                    std::vector<double>& out) const {
  if (w.size() != edges.size())
    throw ValidationError("apply_incidence: vector size != edge count");
  out.assign(node_count, 0.0);
  for (size_t k = 0; k < edges.size(); ++k) {
    out[edges[k].head] += w[k];
    out[edges[k].tail] -= w[k];
  }
}

void EdgeMatrixSet::apply_laplacian(const std::vector<double>& v,
                                    std::vector<double>& out) const {
  if (static_cast<int>(v.size()) != node_count)
    throw ValidationError("apply_laplacian: vector size != node count");
  out.assign(node_count, 0.0);
  for (size_t k = 0; k < edges.size(); ++k) {
    const double diff = v[edges[k].head] - v[edges[k].tail];
    out[edges[k].head] += diff;
    out[edges[k].tail] -= diff;
  }
}

std::vector<std::vector<double>> EdgeMatrixSet::incidence_dense() const {
  std::vector<std::vector<double>> d(node_count, std::vector<double>(edges.size(), 0.0));
  for (size_t k = 0; k < edges.size(); ++k) {
    d[edges[k].head][k] = 1.0;
    d[edges[k].tail][k] = -1.0;
  }
  return d;
}

std::vector<std::vector<double>> EdgeMatrixSet::laplacian_dense() const {
  std::vector<std::vector<double>> l(node_count, std::vector<double>(node_count, 0.0));
  for (const Edge& e : edges) {
    l[e.tail][e.tail] += 1.0;
    l[e.head][e.head] += 1.0;
    l[e.tail][e.head] -= 1.0;
    l[e.head][e.tail] -= 1.0;
  }
  return l;
}

EdgeMatrixSet build_incidence(const Topology& g) {
  validate_topology(g);
  auto comps = connected_components(g);
  if (comps.size() != 1) {
    throw ValidationError("build_incidence: graph is disconnected; components " +
                          component_list(comps));
  }
  return EdgeMatrixSet{g.node_count, g.edges};
}

Topology spanning_tree(const Topology& g) {
  validate_topology(g);
  if (!is_connected(g)) throw ValidationError("spanning_tree: graph must be connected");
  auto adj = adjacency(g);
  std::vector<char> visited(g.node_count, 0);
  Topology tree;
  tree.node_count = g.node_count;
  std::deque<int> queue{0};
  visited[0] = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (auto [u, k] : adj[v]) {
      if (!visited[u]) {
        visited[u] = 1;
        tree.edges.push_back(g.edges[k]);
        queue.push_back(u);
      }
    }
  }
  return tree;
}

std::vector<int> augment_to_connected(const Topology& g, const std::vector<int>& node_set) {
  validate_topology(g);
  if (node_set.empty()) throw ValidationError("augment_to_connected: node set is empty");
  if (!is_connected(g))
    throw ValidationError("augment_to_connected: parent graph must be connected");

  std::vector<char> in_set(g.node_count, 0);
  for (int v : node_set) {
    if (v < 0 || v >= g.node_count)
      throw ValidationError("augment_to_connected: node " + std::to_string(v) +
                            " outside [0," + std::to_string(g.node_count) + ")");
    in_set[v] = 1;
  }
  auto adj = adjacency(g);

  for (;;) {
    // Component (within the current set) containing its smallest node.
    std::vector<char> in_comp(g.node_count, 0);
    int seed = 0;
    while (!in_set[seed]) ++seed;
    std::deque<int> queue{seed};
    in_comp[seed] = 1;
    int comp_size = 0, set_size = 0;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      ++comp_size;
      for (auto [u, k] : adj[v]) {
        if (in_set[u] && !in_comp[u]) {
          in_comp[u] = 1;
          queue.push_back(u);
        }
      }
    }
    for (int v = 0; v < g.node_count; ++v) set_size += in_set[v];
    if (comp_size == set_size) break;

    // Multi-source BFS through the parent graph from that component until any
    // other set node is reached; splice the discovered shortest path in.
    std::vector<int> pred(g.node_count, -1);
    std::vector<char> visited(g.node_count, 0);
    for (int v = 0; v < g.node_count; ++v) {
      if (in_comp[v]) {
        visited[v] = 1;
        queue.push_back(v);
      }
    }
    int hit = -1;
    while (!queue.empty() && hit < 0) {
      int v = queue.front();
      queue.pop_front();
      for (auto [u, k] : adj[v]) {
        if (visited[u]) continue;
        visited[u] = 1;
        pred[u] = v;
        if (in_set[u]) {
          hit = u;
          break;
        }
        queue.push_back(u);
      }
    }
    // Parent connectivity guarantees a hit.
    for (int v = pred[hit]; v >= 0 && !in_comp[v]; v = pred[v]) in_set[v] = 1;
  }

  std::vector<int> result;
  for (int v = 0; v < g.node_count; ++v) {
    if (in_set[v]) result.push_back(v);
  }
  return result;
}

}  // namespace gradflow
