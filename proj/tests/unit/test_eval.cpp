#include "mcseg/error.hpp"
#include "mcseg/eval.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace mcseg;
using eval::ScoredPrediction;

namespace {

IndexList range(Index lo, Index hi) {
  IndexList v;
  for (Index i = lo; i < hi; ++i) v.push_back(i);
  return v;
}

labels::MaskSet two_gt() { return {{1, range(0, 4)}, {2, range(4, 8)}}; }

// Reference AP: rank, match greedily, then sum recall increments times the
// best precision at that recall or beyond.
double reference_ap(std::vector<ScoredPrediction> preds, const labels::MaskSet& gt, double tau) {
  if (preds.empty()) return gt.empty() ? 1.0 : 0.0;
  if (gt.empty()) return 0.0;
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
    return preds[a].mask.size() > preds[b].mask.size();
  });
  std::vector<bool> used(gt.size(), false);
  std::vector<double> prec, rec;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    int best = -1;
    double best_iou = -1;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double v = eval::iou(preds[order[k]].mask, gt[g].points);
      if (!used[g] && v >= tau && v > best_iou) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      used[best] = true;
      ++tp;
    }
    prec.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(gt.size()));
  }
  double ap = 0.0, last_recall = 0.0;
  for (std::size_t k = 0; k < prec.size(); ++k) {
    if (rec[k] > last_recall) {
      ap += (rec[k] - last_recall) * *std::max_element(prec.begin() + k, prec.end());
      last_recall = rec[k];
    }
  }
  return ap;
}

std::vector<ScoredPrediction> random_preds(std::mt19937_64& rng, std::size_t universe) {
  std::vector<ScoredPrediction> out(1 + rng() % 8);
  for (auto& p : out) {
    const Index lo = static_cast<Index>(rng() % universe);
    const Index len = 1 + static_cast<Index>(rng() % 20);
    p.mask = range(lo, std::min<Index>(lo + len, universe));
    p.score = static_cast<double>(rng() % 5);
  }
  return out;
}

labels::MaskSet random_gt(std::mt19937_64& rng, std::size_t universe) {
  LabelMap l(universe, 0);
  Index id = 1;
  for (std::size_t i = 0; i < universe;) {
    const std::size_t len = 3 + rng() % 15;
    const bool fg = rng() % 3 != 0;
    for (std::size_t j = i; j < std::min(universe, i + len); ++j) l[j] = fg ? id : 0;
    id += fg;
    i += len;
  }
  return labels::labels_to_masks(l);
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("iou examples") {
    CHECK(eval::iou({1, 2, 3}, {3, 2, 1}) == 1.0);
    CHECK(eval::iou({1, 2}, {3, 4}) == 0.0);
    CHECK(eval::iou({1, 2}, {2, 3}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(eval::iou({}, {}) == 0.0);
  }

  TEST_CASE("thresholds") {
    CHECK(eval::threshold(0) == 0.25);
    CHECK(eval::threshold(1) == 0.5);
    CHECK(eval::threshold(2) == 0.55);
    CHECK(eval::threshold(10) == 0.95);
    CHECK_THROWS_AS(eval::threshold(11), ArgumentError);
  }

  TEST_CASE("perfect match") {
    const auto r = eval::evaluate({{range(0, 4), 1.0}}, {{1, range(0, 4)}});
    CHECK(r.ap == 1.0);
    CHECK(r.ap50 == 1.0);
    CHECK(r.ap25 == 1.0);
  }

  TEST_CASE("disjoint predictions") {
    const auto r = eval::evaluate({{range(10, 14), 1.0}, {range(20, 22), 0.5}}, two_gt());
    CHECK(r.ap == 0.0);
    CHECK(r.ap50 == 0.0);
    CHECK(r.ap25 == 0.0);
  }

  TEST_CASE("two ground-truth masks, exact plus half overlap") {
    const std::vector<ScoredPrediction> preds{{range(0, 4), 0.9}, {range(4, 6), 0.8}};
    // tau 0.25 and 0.50: TP, TP -> precision 1 at recall 1.
    CHECK(eval::average_precision(preds, two_gt(), 0.25) == 1.0);
    CHECK(eval::average_precision(preds, two_gt(), 0.50) == 1.0);
    // tau 0.55: TP then FP; recall 1/2 at precision 1 -> 0.5.
    CHECK(eval::average_precision(preds, two_gt(), 0.55) == 0.5);
    const auto r = eval::evaluate(preds, two_gt());
    CHECK(r.ap25 == 1.0);
    CHECK(r.ap50 == 1.0);
    CHECK(r.ap == doctest::Approx(0.55).epsilon(1e-15));
  }

  TEST_CASE("false positive ranked first") {
    const std::vector<ScoredPrediction> preds{
        {range(20, 24), 0.95}, {range(0, 4), 0.9}, {range(4, 6), 0.8}};
    // tp = F,T,T; precision 0, 1/2, 2/3; envelope 2/3 at both recall steps.
    CHECK(eval::average_precision(preds, two_gt(), 0.25) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("equal scores rank the larger mask first") {
    const std::vector<ScoredPrediction> preds{{range(0, 4), 1.0}, {range(10, 20), 1.0}};
    CHECK(eval::average_precision(preds, {{1, range(0, 4)}}, 0.5) == 0.5);
  }

  TEST_CASE("empty inputs") {
    CHECK(eval::evaluate({}, {}).ap == 1.0);
    CHECK(eval::evaluate({}, two_gt()).ap == 0.0);
    CHECK(eval::evaluate({{range(0, 2), 1.0}}, {}).ap == 0.0);
    CHECK_THROWS_AS(eval::evaluate({{{}, 1.0}}, two_gt()), ArgumentError);
    CHECK_THROWS_AS(eval::evaluate({{range(0, 2), std::nan("")}}, two_gt()), ArgumentError);
  }

  TEST_CASE("agrees with the reference on random sets") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      const auto gt = random_gt(rng, 80);
      const auto preds = random_preds(rng, 80);
      const auto r = eval::evaluate(preds, gt);
      for (std::size_t i = 0; i < eval::kThresholdCount; ++i) {
        CHECK(r.per_threshold[i] == doctest::Approx(reference_ap(preds, gt, eval::threshold(i))).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("properties: bounded, monotone in tau, duplicates never help, permutation invariant") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 100; ++trial) {
      const auto gt = random_gt(rng, 60);
      auto preds = random_preds(rng, 60);
      double prev = 2.0;
      for (int k = 0; k <= 75; ++k) {
        const double tau = 0.2 + 0.01 * k;
        const double ap = eval::average_precision(preds, gt, tau);
        CHECK(ap >= 0.0);
        CHECK(ap <= 1.0);
        CHECK(ap <= prev);
        prev = ap;
      }
      // Above 0.5 a mask can overlap at most one disjoint GT mask enough to match.
      for (std::size_t i = 2; i < eval::kThresholdCount; ++i) {
        const double tau = eval::threshold(i);
        const double base = eval::average_precision(preds, gt, tau);
        auto dup = preds;
        dup.push_back(preds[rng() % preds.size()]);
        CHECK(eval::average_precision(dup, gt, tau) <= base + 1e-12);
      }
      // Shuffle predictions whose (score, size) keys are all distinct.
      std::vector<ScoredPrediction> distinct;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        preds[i].mask.resize(std::min<std::size_t>(preds[i].mask.size(), 1 + i));
        preds[i].score = 1.0;
        if (preds[i].mask.size() == i + 1) distinct.push_back(preds[i]);
      }
      const auto before = eval::evaluate(distinct, gt);
      std::shuffle(distinct.begin(), distinct.end(), rng);
      CHECK(eval::evaluate(distinct, gt).per_threshold == before.per_threshold);
    }
  }

  TEST_CASE("predictions from labels are scored by size") {
    const auto preds = eval::predictions_from_labels({0, 2, 2, 2, 5, 0, 5});
    REQUIRE(preds.size() == 2);
    CHECK(preds[0].mask == IndexList{1, 2, 3});
    CHECK(preds[0].score == 3.0);
    CHECK(preds[1].score == 2.0);
  }
}
