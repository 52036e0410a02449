#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mcseg {

/// N x 3 block of coordinates or colors, one row per point.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// N x D per-point descriptors, stored exactly as read from disk.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = std::uint32_t;
using IndexList = std::vector<Index>;

/// Instance id per point; 0 is background.
using Label = std::uint32_t;
using LabelMap = std::vector<Label>;

struct PointCloud {
  Points positions;  // meters
  Points colors;     // normalized RGB in [0,1]

  std::size_t size() const noexcept { return static_cast<std::size_t>(positions.rows()); }
};

/// Throws DataError if row counts differ, a coordinate is non-finite, or a
/// color component lies outside [0,1].
void check_cloud(const PointCloud& cloud);

}  // namespace mcseg
