#pragma once

#include "mcseg/config.hpp"
#include "mcseg/graph.hpp"
#include "mcseg/preprocess.hpp"
#include "mcseg/types.hpp"

#include <functional>
#include <string_view>

namespace mcseg::pipeline {

/// Receives stage boundaries, timings and warnings. Any may be empty.
struct Hooks {
  std::function<void(std::string_view stage)> on_begin;
  std::function<void(std::string_view stage, double seconds)> on_stage;
  std::function<void(std::string_view message)> on_warning;
};

/// All work that does not depend on the sigma shift.
struct PreparedScene {
  std::vector<preprocess::Plane> planes;
  preprocess::ForegroundSplit split;
  IndexList sampled;     // cloud indices, FPS order
  WeightedGraph graph;   // over `sampled` positions, combined normalized affinities
  std::size_t degenerate_normals = 0;
};

/// Builds the kNN graph over `subset` of the cloud and fills it with the
/// combined, normalized affinities. Vertices are positions in `subset`.
WeightedGraph affinity_graph(const PointCloud& cloud, const FeatureMatrix* features,
                             const IndexList& subset, const Config& config,
                             const Hooks& hooks = {}, std::size_t* degenerate_normals = nullptr);

/// Plane split, farthest point sampling and the affinity graph.
PreparedScene prepare(const PointCloud& cloud, const FeatureMatrix* features,
                      const Config& config, const Hooks& hooks = {});

/// Sigma shift, multicut, majority-vote upsampling and background attachment.
LabelMap segment(const PointCloud& cloud, const PreparedScene& scene, double sigma,
                 const Config& config, const Hooks& hooks = {});

/// Full-resolution affinity graph over the points with nonzero `labels`, with
/// vertices re-indexed to cloud indices. Feeds labels::consolidate.
WeightedGraph consolidation_graph(const PointCloud& cloud, const FeatureMatrix* features,
                                  const LabelMap& labels, const Config& config,
                                  const Hooks& hooks = {});

std::size_t instance_count(const LabelMap& labels);

}  // namespace mcseg::pipeline
