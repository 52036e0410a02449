#pragma once

#include "mcseg/types.hpp"

#include <filesystem>
#include <optional>

namespace mcseg::io {

/// Reads a PLY point cloud (ascii or binary_little_endian 1.0).
///
/// The vertex element must carry x, y, z (any scalar type) and red, green,
/// blue (uchar). Extra vertex properties are skipped; elements after the
/// vertex element are ignored. Colors are divided by 255.
PointCloud read_ply(const std::filesystem::path& path);

/// Writes a binary_little_endian PLY with float x,y,z and uchar red,green,blue.
/// When `labels` is given the stored colors are replaced by label_color().
void write_ply(const PointCloud& cloud, const std::optional<LabelMap>& labels,
               const std::filesystem::path& path);

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// Palette used for labeled PLY export. Background is gray 128; instance ids
/// step the hue by the golden-ratio conjugate.
Rgb8 label_color(Label label);

/// "FPF1" feature file: magic, u64 N, u64 D, then N*D float32, all little-endian.
FeatureMatrix read_features(const std::filesystem::path& path);
void write_features(const FeatureMatrix& features, const std::filesystem::path& path);

/// One non-negative decimal integer per line.
LabelMap read_labels(const std::filesystem::path& path);
void write_labels(const LabelMap& labels, const std::filesystem::path& path);

}  // namespace mcseg::io
