#pragma once

#include "mcseg/types.hpp"

#include <cstdint>

namespace mcseg::synthetic {

struct BlobSceneParams {
  int blobs = 5;
  int points_per_blob = 200;
  double blob_sigma = 0.05;       // meters
  double min_center_distance = 1.0;
  int ground_points = 6000;
  double extent = 4.0;            // blob centers lie in [0, extent]^2
  double min_height = 0.4;
  double max_height = 1.2;
  double color_noise = 0.02;     // per-channel Gaussian jitter
  // Each blob becomes two touching sub-blobs of different color.
  bool split_blobs = false;
  double split_offset = 0.08;     // distance between sub-blob centers
  std::uint64_t seed = 0;
};

struct Scene {
  PointCloud cloud;
  LabelMap ground_truth;  // blob k -> k+1, ground -> 0
};

/// Gaussian blobs with well separated centers floating over a flat ground
/// plane at z = 0. Deterministic in `seed`.
Scene planted_blobs(const BlobSceneParams& params);

}  // namespace mcseg::synthetic
