#include "mcseg/graph.hpp"

#include "mcseg/error.hpp"
#include "mcseg/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcseg {

std::vector<double> WeightedGraph::weights() const {
  std::vector<double> w(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) w[e] = edges[e].weight;
  return w;
}

void WeightedGraph::set_weights(std::span<const double> w) {
  if (w.size() != edges.size()) {
    throw ArgumentError("set_weights: " + std::to_string(w.size()) + " weights for " +
                        std::to_string(edges.size()) + " edges");
  }
  for (std::size_t e = 0; e < edges.size(); ++e) edges[e].weight = w[e];
}

void check_graph(const WeightedGraph& graph) {
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    if (edge.u >= edge.v || edge.v >= graph.vertex_count) {
      throw DataError("edge " + std::to_string(e) + " (" + std::to_string(edge.u) + "," +
                      std::to_string(edge.v) + ") is not a valid u < v < vertex_count pair");
    }
    if (!std::isfinite(edge.weight)) {
      throw DataError("edge " + std::to_string(e) + " has a non-finite weight");
    }
    if (e > 0) {
      const Edge& prev = graph.edges[e - 1];
      if (prev.u > edge.u || (prev.u == edge.u && prev.v >= edge.v)) {
        throw DataError("edge " + std::to_string(e) + " is duplicated or out of order");
      }
    }
  }
}

}  // namespace mcseg

namespace mcseg::affinity {
namespace {

// Neumaier-compensated sum in index order.
double stable_sum(std::span<const double> values) {
  double sum = 0.0, comp = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

template <typename RowA, typename RowB>
double cosine(const RowA& a, const RowB& b, bool& degenerate) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    degenerate = true;
    return 0.0;
  }
  degenerate = false;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

void expect_rows(Eigen::Index rows, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(rows) != n) {
    throw ArgumentError(std::string("compute_channels: ") + what + " has " +
                        std::to_string(rows) + " rows, graph has " + std::to_string(n) +
                        " vertices");
  }
}

}  // namespace

WeightedGraph build_knn_graph(const Points& positions, std::size_t k) {
  const auto m = static_cast<std::size_t>(positions.rows());
  if (k < 1 || m <= k) {
    throw ArgumentError("build_knn_graph: need point count > k >= 1 (points " +
                        std::to_string(m) + ", k " + std::to_string(k) + ")");
  }
  const KdTree tree(positions);
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(m * k);
  for (std::size_t i = 0; i < m; ++i) {
    const auto self = static_cast<Index>(i);
    for (const auto& nb : tree.knn(positions.row(self).data(), k, self)) {
      pairs.emplace_back(std::min(self, nb.index), std::max(self, nb.index));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  WeightedGraph graph;
  graph.vertex_count = m;
  graph.edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) graph.edges.push_back({u, v, 0.0});
  return graph;
}

Channels compute_channels(const WeightedGraph& graph, const Points& positions,
                          const Points& colors, const Points& normals,
                          const FeatureMatrix* features) {
  const std::size_t n = graph.vertex_count;
  expect_rows(positions.rows(), n, "positions");
  expect_rows(colors.rows(), n, "colors");
  expect_rows(normals.rows(), n, "normals");
  if (features) expect_rows(features->rows(), n, "features");

  const std::size_t e_count = graph.edges.size();
  Channels ch;
  ch.normal.resize(e_count);
  ch.xyz.resize(e_count);
  ch.rgb.resize(e_count);
  if (features) ch.embedding.emplace(e_count);

  for (std::size_t e = 0; e < e_count; ++e) {
    const auto u = static_cast<Eigen::Index>(graph.edges[e].u);
    const auto v = static_cast<Eigen::Index>(graph.edges[e].v);
    bool degenerate = false;
    if (features) {
      (*ch.embedding)[e] = cosine(features->row(u).cast<double>(),
                                  features->row(v).cast<double>(), degenerate);
      ch.degenerate_embedding += degenerate;
    }
    ch.normal[e] = std::abs(cosine(normals.row(u), normals.row(v), degenerate));
    ch.degenerate_normal += degenerate;
    ch.xyz[e] = -std::sqrt(squared_distance(positions.row(u).data(), positions.row(v).data()));
    ch.rgb[e] = -std::sqrt(squared_distance(colors.row(u).data(), colors.row(v).data()));
  }
  return ch;
}

std::vector<double> normalize_channel(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("normalize_channel: no values");
  const double n = static_cast<double>(values.size());
  const double mean = stable_sum(values) / n;
  std::vector<double> centered(values.size());
  std::vector<double> squares(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    centered[i] = values[i] - mean;
    squares[i] = centered[i] * centered[i];
  }
  const double variance = stable_sum(squares) / n;
  if (variance < 1e-12) return std::vector<double>(values.size(), 0.0);
  const double inv_std = 1.0 / std::sqrt(variance);
  for (double& c : centered) c *= inv_std;
  return centered;
}

void normalize(Channels& channels) {
  if (channels.xyz.empty()) return;
  if (channels.embedding) *channels.embedding = normalize_channel(*channels.embedding);
  channels.normal = normalize_channel(channels.normal);
  channels.xyz = normalize_channel(channels.xyz);
  channels.rgb = normalize_channel(channels.rgb);
}

std::vector<double> combine(const Channels& channels, const Weights& weights) {
  for (const double a : {weights.emb, weights.norm, weights.xyz, weights.rgb}) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ConfigError("affinity weights must be finite and non-negative");
    }
  }
  if (weights.emb + weights.norm + weights.xyz + weights.rgb <= 0.0) {
    throw ConfigError("at least one affinity weight must be positive");
  }
  if (weights.emb > 0.0 && !channels.embedding) {
    throw ConfigError("alpha_emb > 0 requires a per-point feature matrix");
  }
  const std::size_t n = channels.xyz.size();
  if (channels.normal.size() != n || channels.rgb.size() != n ||
      (channels.embedding && channels.embedding->size() != n)) {
    throw ArgumentError("combine: channel lengths differ");
  }
  std::vector<double> out(n);
  for (std::size_t e = 0; e < n; ++e) {
    double a = 0.0;
    if (channels.embedding) a += weights.emb * (*channels.embedding)[e];
    a += weights.norm * channels.normal[e];
    a += weights.xyz * channels.xyz[e];
    a += weights.rgb * channels.rgb[e];
    out[e] = a;
  }
  return out;
}

std::vector<double> apply_sigma(std::span<const double> weights, double sigma) {
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w += sigma;
  return out;
}

}  // namespace mcseg::affinity
