#include "mcseg/eval.hpp"

#include "mcseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace mcseg::eval {
namespace {

IndexList sorted_unique(IndexList v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// IoU of every (ranked prediction, ground-truth mask) pair plus the ranking.
struct Overlaps {
  std::vector<std::size_t> rank;         // prediction indices, best first
  std::vector<std::vector<double>> iou;  // [prediction][gt]
};

Overlaps compute_overlaps(const std::vector<ScoredPrediction>& preds, const labels::MaskSet& gt) {
  std::vector<IndexList> pred_sets(preds.size());
  for (std::size_t p = 0; p < preds.size(); ++p) {
    if (preds[p].mask.empty()) {
      throw ArgumentError("evaluate: prediction " + std::to_string(p) + " has an empty mask");
    }
    if (!std::isfinite(preds[p].score)) {
      throw ArgumentError("evaluate: prediction " + std::to_string(p) + " has a non-finite score");
    }
    pred_sets[p] = sorted_unique(preds[p].mask);
  }

  Overlaps out;
  out.rank.resize(preds.size());
  std::iota(out.rank.begin(), out.rank.end(), std::size_t{0});
  std::stable_sort(out.rank.begin(), out.rank.end(), [&](std::size_t a, std::size_t b) {
    if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
    return pred_sets[a].size() > pred_sets[b].size();
  });

  std::unordered_map<Index, std::size_t> owner;
  std::vector<std::size_t> gt_size(gt.size());
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const IndexList points = sorted_unique(gt[g].points);
    gt_size[g] = points.size();
    for (const Index i : points) owner.emplace(i, g);
  }

  out.iou.assign(preds.size(), std::vector<double>(gt.size(), 0.0));
  std::vector<std::size_t> inter(gt.size());
  for (std::size_t p = 0; p < preds.size(); ++p) {
    std::fill(inter.begin(), inter.end(), 0);
    for (const Index i : pred_sets[p]) {
      if (const auto it = owner.find(i); it != owner.end()) ++inter[it->second];
    }
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (inter[g] == 0) continue;
      const std::size_t uni = pred_sets[p].size() + gt_size[g] - inter[g];
      out.iou[p][g] = static_cast<double>(inter[g]) / static_cast<double>(uni);
    }
  }
  return out;
}

double ap_at(const Overlaps& ov, std::size_t gt_count, double tau) {
  const std::size_t n = ov.rank.size();
  if (n == 0) return gt_count == 0 ? 1.0 : 0.0;
  if (gt_count == 0) return 0.0;

  std::vector<bool> matched(gt_count, false);
  std::vector<bool> tp(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& row = ov.iou[ov.rank[k]];
    std::size_t best = gt_count;
    for (std::size_t g = 0; g < gt_count; ++g) {
      if (matched[g] || row[g] < tau) continue;
      if (best == gt_count || row[g] > row[best]) best = g;
    }
    if (best != gt_count) {
      matched[best] = true;
      tp[k] = true;
    }
  }

  std::vector<double> precision(n);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    hits += tp[k];
    precision[k] = static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  for (std::size_t k = n - 1; k-- > 0;) precision[k] = std::max(precision[k], precision[k + 1]);

  double ap = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (tp[k]) ap += precision[k];
  }
  return ap / static_cast<double>(gt_count);
}

}  // namespace

double iou(const IndexList& a, const IndexList& b) {
  const IndexList sa = sorted_unique(a), sb = sorted_unique(b);
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = sa.begin();
  auto ib = sb.begin();
  while (ia != sa.end() && ib != sb.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter, ++ia, ++ib;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double threshold(std::size_t i) {
  if (i >= kThresholdCount) throw ArgumentError("threshold: index out of range");
  if (i == 0) return 25.0 / 100.0;
  return static_cast<double>(50 + 5 * (i - 1)) / 100.0;
}

double average_precision(const std::vector<ScoredPrediction>& preds, const labels::MaskSet& gt,
                         double iou_threshold) {
  return ap_at(compute_overlaps(preds, gt), gt.size(), iou_threshold);
}

ApReport evaluate(const std::vector<ScoredPrediction>& preds, const labels::MaskSet& gt) {
  const Overlaps ov = compute_overlaps(preds, gt);
  ApReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < kThresholdCount; ++i) {
    report.per_threshold[i] = ap_at(ov, gt.size(), threshold(i));
    if (i > 0) sum += report.per_threshold[i];
  }
  report.ap25 = report.per_threshold[0];
  report.ap50 = report.per_threshold[1];
  report.ap = sum / static_cast<double>(kThresholdCount - 1);
  return report;
}

std::vector<ScoredPrediction> predictions_from_labels(const LabelMap& labels) {
  std::vector<ScoredPrediction> preds;
  for (auto& mask : labels::labels_to_masks(labels)) {
    const auto score = static_cast<double>(mask.points.size());
    preds.push_back({std::move(mask.points), score});
  }
  return preds;
}

}  // namespace mcseg::eval
