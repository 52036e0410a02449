#pragma once

#include "mcseg/graph.hpp"
#include "mcseg/preprocess.hpp"
#include "mcseg/types.hpp"

#include <vector>

namespace mcseg::labels {

struct Mask {
  Label id = 0;
  IndexList points;  // ascending

  friend bool operator==(const Mask&, const Mask&) = default;
};

/// One mask per nonzero label, ordered by id.
using MaskSet = std::vector<Mask>;

MaskSet labels_to_masks(const LabelMap& labels);

/// Inverse of labels_to_masks. Throws ArgumentError on overlap, a zero id,
/// a repeated id or an index outside [0, point_count).
LabelMap masks_to_labels(const MaskSet& masks, std::size_t point_count);

/// Renumbers nonzero labels to 1..K in order of first appearance.
LabelMap canonicalize(const LabelMap& labels);

/// Each query point takes the most frequent label among its k nearest sampled
/// points. Tied counts go to the tied label seen closest to the query.
LabelMap upsample_majority(const Points& query_positions, const Points& sampled_positions,
                           const std::vector<Label>& sampled_labels, std::size_t k);

/// Scatters foreground labels into a full-length map, background = 0, and
/// renumbers foreground ids to 1..K by first appearance.
LabelMap attach_background(const std::vector<Label>& fg_labels,
                           const preprocess::ForegroundSplit& split, std::size_t total_count);

struct ConsolidateParams {
  double aff_threshold = 0.0;
  double cover_frac = 0.6;
};

/// Merges base instances that fall inside one coarse instance and touch each
/// other with enough affinity.
///
/// A base instance maps to the `under` instance holding at least cover_frac
/// of its points. Two base instances mapped to the same coarse instance are
/// merged when `affinity` has at least one edge between them and the mean
/// weight over those edges exceeds aff_threshold. Merges are transitive.
/// `affinity` vertices are point indices of the label maps.
LabelMap consolidate(const LabelMap& base, const LabelMap& under, const WeightedGraph& affinity,
                     const ConsolidateParams& params);

}  // namespace mcseg::labels
