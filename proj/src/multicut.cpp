#include "mcseg/multicut.hpp"

#include "mcseg/error.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace mcseg::multicut {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Keeps the smaller root.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

void check_length(const WeightedGraph& graph, const Decomposition& d) {
  if (d.cluster_of.size() != graph.vertex_count) {
    throw ArgumentError("decomposition has " + std::to_string(d.cluster_of.size()) +
                        " entries for " + std::to_string(graph.vertex_count) + " vertices");
  }
}

// True when every cluster induces a connected subgraph.
bool clusters_connected(const WeightedGraph& graph, const std::vector<Index>& cluster_of,
                        std::size_t cluster_count, std::size_t* bad_cluster = nullptr) {
  DisjointSets sets(graph.vertex_count);
  for (const Edge& e : graph.edges) {
    if (cluster_of[e.u] == cluster_of[e.v]) sets.unite(e.u, e.v);
  }
  std::vector<std::size_t> root(cluster_count, std::numeric_limits<std::size_t>::max());
  for (std::size_t v = 0; v < graph.vertex_count; ++v) {
    const std::size_t r = sets.find(v);
    auto& slot = root[cluster_of[v]];
    if (slot == std::numeric_limits<std::size_t>::max()) {
      slot = r;
    } else if (slot != r) {
      if (bad_cluster) *bad_cluster = cluster_of[v];
      return false;
    }
  }
  return true;
}

struct Candidate {
  double weight;
  Index u, v;
};

// Max-heap order: heavier first, then smaller (u, v).
struct CandidateOrder {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.weight != b.weight) return a.weight < b.weight;
    return std::tie(a.u, a.v) > std::tie(b.u, b.v);
  }
};

}  // namespace

Decomposition canonicalize(std::vector<Index> cluster_of) {
  std::unordered_map<Index, Index> remap;
  for (Index& c : cluster_of) {
    const auto [it, inserted] = remap.try_emplace(c, static_cast<Index>(remap.size()));
    c = it->second;
  }
  return Decomposition{std::move(cluster_of), remap.size()};
}

double objective(const WeightedGraph& graph, const Decomposition& decomposition) {
  check_length(graph, decomposition);
  double cost = 0.0;
  for (const Edge& e : graph.edges) {
    if (decomposition.cluster_of[e.u] != decomposition.cluster_of[e.v]) cost += e.weight;
  }
  return cost;
}

Decomposition solve_gaec(const WeightedGraph& graph, GaecTrace* trace) {
  check_graph(graph);
  const std::size_t n = graph.vertex_count;
  std::vector<std::map<Index, double>> adj(n);
  for (const Edge& e : graph.edges) {
    adj[e.u][e.v] += e.weight;
    adj[e.v][e.u] += e.weight;
  }

  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> queue;
  for (const Edge& e : graph.edges) {
    if (e.weight > 0.0) queue.push({e.weight, e.u, e.v});
  }

  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  std::vector<bool> alive(n, true);
  if (trace) trace->contracted_weights.clear();

  while (!queue.empty()) {
    const Candidate top = queue.top();
    queue.pop();
    if (!alive[top.u] || !alive[top.v]) continue;
    const auto it = adj[top.u].find(top.v);
    if (it == adj[top.u].end() || it->second != top.weight) continue;

    // Contract v into u; u < v, so clusters stay named by their smallest vertex.
    const Index keep = top.u, drop = top.v;
    adj[keep].erase(drop);
    for (const auto& [nbr, w] : adj[drop]) {
      if (nbr == keep) continue;
      adj[nbr].erase(drop);
      const double merged = (adj[keep][nbr] += w);
      adj[nbr][keep] = merged;
      if (merged > 0.0) queue.push({merged, std::min(keep, nbr), std::max(keep, nbr)});
    }
    adj[drop].clear();
    alive[drop] = false;
    parent[drop] = keep;
    if (trace) trace->contracted_weights.push_back(top.weight);
  }

  std::vector<Index> cluster_of(n);
  for (std::size_t v = 0; v < n; ++v) {
    Index r = static_cast<Index>(v);
    while (parent[r] != r) r = parent[r];
    cluster_of[v] = r;
  }
  return canonicalize(std::move(cluster_of));
}

Decomposition exact_solve(const WeightedGraph& graph) {
  check_graph(graph);
  const std::size_t n = graph.vertex_count;
  if (n > kExactMaxVertices) {
    throw SizeError("exact_solve: " + std::to_string(n) + " vertices exceeds the limit of " +
                    std::to_string(kExactMaxVertices));
  }
  if (n == 0) return {};

  // Restricted growth strings enumerate every set partition exactly once, in
  // lexicographic order, already in canonical form.
  std::vector<Index> labels(n, 0);
  std::vector<Index> best;
  std::size_t best_count = 0;
  double best_cost = std::numeric_limits<double>::infinity();

  std::function<void(std::size_t, Index)> visit = [&](std::size_t pos, Index used) {
    if (pos == n) {
      double cost = 0.0;
      for (const Edge& e : graph.edges) {
        if (labels[e.u] != labels[e.v]) cost += e.weight;
      }
      if (cost < best_cost && clusters_connected(graph, labels, used)) {
        best_cost = cost;
        best = labels;
        best_count = used;
      }
      return;
    }
    for (Index c = 0; c <= used && c < n; ++c) {
      labels[pos] = c;
      visit(pos + 1, c == used ? used + 1 : used);
    }
  };
  labels[0] = 0;
  visit(1, 1);
  return Decomposition{std::move(best), best_count};
}

Validation validate(const WeightedGraph& graph, const Decomposition& d) {
  if (d.cluster_of.size() != graph.vertex_count) {
    return {false, "length mismatch: " + std::to_string(d.cluster_of.size()) + " labels for " +
                       std::to_string(graph.vertex_count) + " vertices"};
  }
  Index next = 0;
  for (std::size_t v = 0; v < d.cluster_of.size(); ++v) {
    const Index c = d.cluster_of[v];
    if (c > next) {
      return {false, "non-canonical cluster id " + std::to_string(c) + " at vertex " +
                         std::to_string(v) + " (expected at most " + std::to_string(next) + ")"};
    }
    if (c == next) ++next;
  }
  if (d.cluster_count != next) {
    return {false, "cluster_count " + std::to_string(d.cluster_count) + " but " +
                       std::to_string(next) + " clusters present"};
  }
  std::size_t bad = 0;
  if (!clusters_connected(graph, d.cluster_of, d.cluster_count, &bad)) {
    return {false, "disconnected cluster " + std::to_string(bad)};
  }
  return {};
}

}  // namespace mcseg::multicut
