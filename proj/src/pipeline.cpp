#include "mcseg/pipeline.hpp"

#include "mcseg/error.hpp"
#include "mcseg/labels.hpp"
#include "mcseg/multicut.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <unordered_set>

namespace mcseg::pipeline {
namespace {

class StageTimer {
 public:
  StageTimer(const Hooks& hooks, std::string_view stage)
      : hooks_(hooks), stage_(stage), start_(std::chrono::steady_clock::now()) {
    if (hooks_.on_begin) hooks_.on_begin(stage_);
  }
  ~StageTimer() {
    if (!hooks_.on_stage) return;
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    hooks_.on_stage(stage_, dt.count());
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  const Hooks& hooks_;
  std::string_view stage_;
  std::chrono::steady_clock::time_point start_;
};

void warn(const Hooks& hooks, const std::string& message) {
  if (hooks.on_warning) hooks.on_warning(message);
}

Points gather(const Points& source, const IndexList& rows) {
  Points out(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
  }
  return out;
}

void check_features(const PointCloud& cloud, const FeatureMatrix* features) {
  if (features && static_cast<std::size_t>(features->rows()) != cloud.size()) {
    throw DataError("feature matrix has " + std::to_string(features->rows()) + " rows for " +
                    std::to_string(cloud.size()) + " points");
  }
}

void check_weights(const Config& config, bool has_features) {
  const auto w = config.affinity_weights(has_features);
  if (w.emb > 0.0 && !has_features) {
    throw ConfigError("affinity.alpha_emb > 0 requires a feature file");
  }
  if (w.emb + w.norm + w.xyz + w.rgb <= 0.0) {
    throw ConfigError("at least one affinity weight must be positive");
  }
}

}  // namespace

WeightedGraph affinity_graph(const PointCloud& cloud, const FeatureMatrix* features,
                             const IndexList& subset, const Config& config, const Hooks& hooks,
                             std::size_t* degenerate_normals) {
  check_features(cloud, features);
  const std::size_t m = subset.size();
  WeightedGraph graph;
  graph.vertex_count = m;
  if (degenerate_normals) *degenerate_normals = 0;
  if (m < 2) return graph;

  const Points positions = gather(cloud.positions, subset);
  const Points colors = gather(cloud.colors, subset);

  std::size_t k1 = config.graph_k1;
  if (k1 >= m) {
    k1 = m - 1;
    warn(hooks, "graph.k1 reduced to " + std::to_string(k1) + " for " + std::to_string(m) +
                    " points");
  }
  {
    StageTimer t(hooks, "knn_graph");
    graph = affinity::build_knn_graph(positions, k1);
  }

  Points normals;
  {
    StageTimer t(hooks, "normals");
    std::size_t k = config.normals_k;
    if (m <= k) k = m - 1;
    if (k >= 3) {
      if (k != config.normals_k) {
        warn(hooks, "normals.k reduced to " + std::to_string(k) + " for " + std::to_string(m) +
                        " points");
      }
      auto est = preprocess::estimate_normals(cloud.positions, subset, k);
      normals = std::move(est.normals);
      if (degenerate_normals) *degenerate_normals = est.degenerate.size();
    } else {
      warn(hooks, "too few points for normal estimation; using (0,0,1)");
      normals = Points::Zero(static_cast<Eigen::Index>(m), 3);
      normals.col(2).setOnes();
      if (degenerate_normals) *degenerate_normals = m;
    }
  }

  StageTimer t(hooks, "affinity");
  FeatureMatrix sub_features;
  if (features) {
    sub_features.resize(static_cast<Eigen::Index>(m), features->cols());
    for (std::size_t i = 0; i < m; ++i) {
      sub_features.row(static_cast<Eigen::Index>(i)) = features->row(subset[i]);
    }
  }
  auto channels = affinity::compute_channels(graph, positions, colors, normals,
                                             features ? &sub_features : nullptr);
  if (channels.degenerate_embedding > 0) {
    warn(hooks, std::to_string(channels.degenerate_embedding) +
                    " edges touch a zero-norm feature vector");
  }
  affinity::normalize(channels);
  graph.set_weights(affinity::combine(channels, config.affinity_weights(features != nullptr)));
  return graph;
}

PreparedScene prepare(const PointCloud& cloud, const FeatureMatrix* features, const Config& config,
                      const Hooks& hooks) {
  check_cloud(cloud);
  check_features(cloud, features);
  check_weights(config, features != nullptr);

  PreparedScene scene;
  {
    StageTimer t(hooks, "planes");
    if (cloud.size() >= 3) scene.planes = preprocess::segment_planes(cloud.positions, config.plane_params());
  }
  scene.split = preprocess::split_foreground(cloud.size(), scene.planes);
  if (scene.split.fg.empty()) {
    warn(hooks, "no foreground points remain after plane removal");
    return scene;
  }
  {
    StageTimer t(hooks, "fps");
    const auto fg_count = static_cast<double>(scene.split.fg.size());
    const auto target = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(fg_count * config.fps_ratio)), 1, scene.split.fg.size());
    scene.sampled = preprocess::farthest_point_sample(cloud.positions, scene.split.fg, target,
                                                      scene.split.fg.front());
  }
  scene.graph = affinity_graph(cloud, features, scene.sampled, config, hooks,
                               &scene.degenerate_normals);
  return scene;
}

LabelMap segment(const PointCloud& cloud, const PreparedScene& scene, double sigma,
                 const Config& config, const Hooks& hooks) {
  if (scene.sampled.empty()) return LabelMap(cloud.size(), 0);

  WeightedGraph shifted = scene.graph;
  shifted.set_weights(affinity::apply_sigma(scene.graph.weights(), sigma));
  multicut::Decomposition decomposition;
  {
    StageTimer t(hooks, "multicut");
    decomposition = multicut::solve_gaec(shifted);
  }

  StageTimer t(hooks, "upsample");
  const std::vector<Label> sampled_labels(decomposition.cluster_of.begin(),
                                          decomposition.cluster_of.end());
  const LabelMap fg_labels =
      labels::upsample_majority(gather(cloud.positions, scene.split.fg),
                                gather(cloud.positions, scene.sampled), sampled_labels,
                                config.labels_k2);
  return labels::attach_background(fg_labels, scene.split, cloud.size());
}

WeightedGraph consolidation_graph(const PointCloud& cloud, const FeatureMatrix* features,
                                  const LabelMap& labels, const Config& config,
                                  const Hooks& hooks) {
  if (labels.size() != cloud.size()) {
    throw DataError("label map has " + std::to_string(labels.size()) + " entries for " +
                    std::to_string(cloud.size()) + " points");
  }
  check_weights(config, features != nullptr);
  IndexList subset;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) subset.push_back(static_cast<Index>(i));
  }
  WeightedGraph local = affinity_graph(cloud, features, subset, config, hooks);
  WeightedGraph graph;
  graph.vertex_count = cloud.size();
  graph.edges.reserve(local.edges.size());
  // subset is ascending, so u < v and the (u, v) order survive the re-indexing.
  for (const Edge& e : local.edges) graph.edges.push_back({subset[e.u], subset[e.v], e.weight});
  return graph;
}

std::size_t instance_count(const LabelMap& labels) {
  std::unordered_set<Label> ids;
  for (const Label l : labels) {
    if (l != 0) ids.insert(l);
  }
  return ids.size();
}

}  // namespace mcseg::pipeline
