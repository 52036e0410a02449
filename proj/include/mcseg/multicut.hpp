#pragma once

#include "mcseg/graph.hpp"

#include <string>
#include <vector>

namespace mcseg::multicut {

/// Partition of the vertices into clusters 0..cluster_count-1. Canonical
/// form numbers clusters in order of their first vertex.
struct Decomposition {
  std::vector<Index> cluster_of;
  std::size_t cluster_count = 0;

  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

/// Relabels to canonical form; cluster_count is recomputed.
Decomposition canonicalize(std::vector<Index> cluster_of);

/// Sum of the weights of edges whose endpoints lie in different clusters.
double objective(const WeightedGraph& graph, const Decomposition& decomposition);

/// Optional record of a GAEC run: the aggregated weight of every contracted
/// edge, in contraction order.
struct GaecTrace {
  std::vector<double> contracted_weights;
};

/// Greedy additive edge contraction. Repeatedly contracts the heaviest
/// positive edge, summing parallel edges. A contracted cluster is named by
/// its smallest vertex; equal weights resolve to the smallest (u, v) pair.
Decomposition solve_gaec(const WeightedGraph& graph, GaecTrace* trace = nullptr);

inline constexpr std::size_t kExactMaxVertices = 10;

/// Exhaustive optimum over all partitions with connected clusters. Ties go to
/// the lexicographically smallest canonical labeling. Throws SizeError above
/// kExactMaxVertices.
Decomposition exact_solve(const WeightedGraph& graph);

struct Validation {
  bool ok = true;
  std::string message;  // first violation, empty when ok
};

Validation validate(const WeightedGraph& graph, const Decomposition& decomposition);

}  // namespace mcseg::multicut
