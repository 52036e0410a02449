#pragma once

#include "mcseg/types.hpp"

#include <cstdint>
#include <vector>

namespace mcseg::preprocess {

/// Plane n.x = offset with its inlier set.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
  IndexList inliers;  // ascending cloud indices
};

struct PlaneParams {
  double dist_thresh = 0.025;
  double min_inlier_frac = 0.05;
  int max_planes = 8;
  int iters = 1000;
  std::uint64_t seed = 0;
};

/// Iterative RANSAC: fit the best-supported plane among the remaining points,
/// record it, remove its inliers, repeat. Stops when support falls below
/// min_inlier_frac of the original point count, after max_planes planes, or
/// when fewer than three points remain.
std::vector<Plane> segment_planes(const Points& positions, const PlaneParams& params);

struct ForegroundSplit {
  IndexList fg;  // ascending
  IndexList bg;  // ascending
};

ForegroundSplit split_foreground(std::size_t point_count, const std::vector<Plane>& planes);

/// Greedy farthest point sampling over `subset`, starting at cloud index
/// `start`. Returns cloud indices in selection order. Ties go to the smaller
/// cloud index.
IndexList farthest_point_sample(const Points& positions, const IndexList& subset,
                                std::size_t target_count, Index start);

struct Normals {
  Points normals;        // one unit row per subset entry
  IndexList degenerate;  // subset positions whose neighborhood had zero spread
};

/// PCA normal per subset point from its k nearest neighbors (itself included)
/// within the subset. Degenerate neighborhoods get (0,0,1).
Normals estimate_normals(const Points& positions, const IndexList& subset, std::size_t k);

}  // namespace mcseg::preprocess
