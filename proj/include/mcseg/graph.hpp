#pragma once

#include "mcseg/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mcseg {

struct Edge {
  Index u = 0;
  Index v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph with one scalar cost per edge. Edges are kept sorted by
/// (u, v) with u < v.
struct WeightedGraph {
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;

  std::vector<double> weights() const;
  void set_weights(std::span<const double> w);
};

/// Throws DataError on out-of-range endpoints, u >= v, duplicates, unsorted
/// edges or non-finite weights.
void check_graph(const WeightedGraph& graph);

}  // namespace mcseg

namespace mcseg::affinity {

/// Connects each vertex to its k nearest neighbors (ties by index) and merges
/// the directed pairs. All weights start at zero.
WeightedGraph build_knn_graph(const Points& positions, std::size_t k);

struct Channels {
  std::optional<std::vector<double>> embedding;  // cos(F_i, F_j)
  std::vector<double> normal;                    // |cos(N_i, N_j)|
  std::vector<double> xyz;                       // -|V_i - V_j|
  std::vector<double> rgb;                       // -|C_i - C_j|
  std::size_t degenerate_embedding = 0;          // edges with a zero-norm feature
  std::size_t degenerate_normal = 0;             // edges with a zero-norm normal
};

/// Per-edge raw affinities. All inputs are indexed by graph vertex.
Channels compute_channels(const WeightedGraph& graph, const Points& positions,
                          const Points& colors, const Points& normals,
                          const FeatureMatrix* features = nullptr);

/// Standardizes to zero mean and unit population variance. Channels with
/// variance below 1e-12 map to all zeros.
std::vector<double> normalize_channel(std::span<const double> values);

/// Normalizes every channel present in place.
void normalize(Channels& channels);

struct Weights {
  double emb = 0.0;
  double norm = 1.0;
  double xyz = 1.0;
  double rgb = 1.0;
};

/// alpha_emb * A_emb + alpha_norm * A_norm + alpha_xyz * A_xyz + alpha_rgb * A_rgb.
/// Throws ConfigError for negative weights, all-zero weights, or a positive
/// embedding weight without an embedding channel.
std::vector<double> combine(const Channels& channels, const Weights& weights);

std::vector<double> apply_sigma(std::span<const double> weights, double sigma);

}  // namespace mcseg::affinity
