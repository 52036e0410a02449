#pragma once

#include "mcseg/labels.hpp"

#include <array>
#include <vector>

namespace mcseg::eval {

struct ScoredPrediction {
  IndexList mask;
  double score = 0.0;
};

/// |a ∩ b| / |a ∪ b|; 0 when both are empty. Inputs need not be sorted.
double iou(const IndexList& a, const IndexList& b);

inline constexpr std::size_t kThresholdCount = 11;

/// IoU thresholds indexed as 0.25, then 0.50, 0.55, ..., 0.95.
double threshold(std::size_t i);

struct ApReport {
  double ap = 0.0;    // mean over 0.50:0.05:0.95
  double ap50 = 0.0;
  double ap25 = 0.0;
  std::array<double, kThresholdCount> per_threshold{};  // same indexing as threshold()
};

/// Average precision at a single IoU threshold.
double average_precision(const std::vector<ScoredPrediction>& preds,
                         const labels::MaskSet& gt, double iou_threshold);

/// Class-agnostic AP. Predictions are ranked by score, then larger mask, then
/// input position; each one greedily claims the unmatched ground-truth mask of
/// highest IoU at or above the threshold. AP is the area under the
/// precision envelope.
ApReport evaluate(const std::vector<ScoredPrediction>& preds, const labels::MaskSet& gt);

/// Predictions from a label map, scored by mask size.
std::vector<ScoredPrediction> predictions_from_labels(const LabelMap& labels);

}  // namespace mcseg::eval
