#pragma once

#include "mcseg/graph.hpp"
#include "mcseg/labels.hpp"
#include "mcseg/losses.hpp"
#include "mcseg/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcseg {

/// Every tunable of the pipeline. Text form is one `section.key = value` per
/// line; `#` starts a comment.
struct Config {
  // plane.*
  double plane_dist_thresh = 0.025;
  double plane_min_inlier_frac = 0.05;
  int plane_max_planes = 8;
  int plane_iters = 1000;
  // fps.ratio: fraction of foreground points kept by farthest point sampling
  double fps_ratio = 0.5;
  std::size_t normals_k = 16;
  std::size_t graph_k1 = 4;
  // Unset means 1 with features and 0 without.
  std::optional<double> alpha_emb;
  double alpha_norm = 1.0;
  double alpha_xyz = 1.0;
  double alpha_rgb = 1.0;
  double sigma_low = 0.9;
  double sigma_high = 1.2;
  std::size_t labels_k2 = 4;
  double consolidate_cover_frac = 0.6;
  double consolidate_aff_threshold = 0.0;
  double loss_lambda_dice = 1.0;
  double loss_lambda_bce = 1.0;
  double loss_lambda_mean = 1.0;
  double loss_lambda_box = 1.0;
  double loss_beta = 100.0;
  std::uint64_t seed = 0;

  /// Sets one key from its text value. Throws ConfigError for unknown keys,
  /// unparsable values or out-of-range values.
  void set(std::string_view key, std::string_view value);

  /// Applies a config file's lines on top of the current values.
  void merge_text(std::string_view text, std::string_view origin = "<config>");
  void merge_file(const std::filesystem::path& path);

  /// Resolved key/value pairs in a fixed order; alpha_emb is omitted when unset.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;

  /// Resolves the unset embedding weight against feature availability.
  affinity::Weights affinity_weights(bool has_features) const;
  preprocess::PlaneParams plane_params() const;
  labels::ConsolidateParams consolidate_params() const;
  losses::LossWeights loss_weights() const;

  static const std::vector<std::string>& keys();
};

}  // namespace mcseg
