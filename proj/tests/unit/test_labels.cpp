#include "mcseg/error.hpp"
#include "mcseg/labels.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace mcseg;
using labels::Mask;

namespace {

// Points 0-9 "seat", 10-19 "back", 20-29 a separate object. Edges: a path
// inside each part, and `bridge` edges between seat and back with the given
// weight.
WeightedGraph chair_graph(double bridge_weight, double inner_weight = 1.0) {
  WeightedGraph g;
  g.vertex_count = 30;
  for (Index part = 0; part < 3; ++part) {
    for (Index i = 0; i < 9; ++i) g.edges.push_back({part * 10 + i, part * 10 + i + 1, inner_weight});
  }
  for (Index i = 0; i < 3; ++i) g.edges.push_back({i, 10 + i, bridge_weight});
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  return g;
}

LabelMap blocks(std::initializer_list<Label> ids) {
  LabelMap out;
  for (const Label l : ids) out.insert(out.end(), 10, l);
  return out;
}

}  // namespace

TEST_SUITE("labels") {
  TEST_CASE("masks from a label map and back") {
    const auto masks = labels::labels_to_masks({0, 1, 1, 2});
    REQUIRE(masks.size() == 2);
    CHECK(masks[0] == Mask{1, {1, 2}});
    CHECK(masks[1] == Mask{2, {3}});
    CHECK(labels::masks_to_labels(masks, 4) == LabelMap{0, 1, 1, 2});

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
      LabelMap l(rng() % 100);
      for (auto& v : l) v = static_cast<Label>(rng() % 7 == 0 ? 0 : rng() % 20);
      CHECK(labels::masks_to_labels(labels::labels_to_masks(l), l.size()) == l);
    }
  }

  TEST_CASE("masks_to_labels rejects bad mask sets") {
    CHECK_THROWS_AS(labels::masks_to_labels({{1, {0, 1}}, {2, {1}}}, 3), ArgumentError);
    CHECK_THROWS_AS(labels::masks_to_labels({{0, {0}}}, 3), ArgumentError);
    CHECK_THROWS_AS(labels::masks_to_labels({{1, {0}}, {1, {2}}}, 3), ArgumentError);
    CHECK_THROWS_AS(labels::masks_to_labels({{1, {3}}}, 3), ArgumentError);
  }

  TEST_CASE("canonicalize renumbers by first appearance") {
    CHECK(labels::canonicalize({0, 9, 9, 4, 0, 4, 7}) == LabelMap{0, 1, 1, 2, 0, 2, 3});
  }

  TEST_CASE("upsample with k = 1 is nearest-neighbor transfer") {
    const Points sampled = testing::random_cloud(30, 2);
    const Points query = testing::random_cloud(200, 3);
    std::vector<Label> lab(30);
    for (std::size_t i = 0; i < lab.size(); ++i) lab[i] = static_cast<Label>(i % 4);
    const auto out = labels::upsample_majority(query, sampled, lab, 1);
    for (Eigen::Index q = 0; q < query.rows(); ++q) {
      CHECK(out[q] == lab[testing::brute_knn(sampled, query, q, 1)[0]]);
    }
  }

  TEST_CASE("upsample with unanimous neighbors") {
    const Points sampled = testing::random_cloud(10, 4);
    const auto out = labels::upsample_majority(testing::random_cloud(50, 5), sampled,
                                               std::vector<Label>(10, 6), 4);
    CHECK(out == LabelMap(50, 6));
  }

  TEST_CASE("upsample tie goes to the nearest neighbor's label") {
    Points sampled(4, 3);
    sampled << 0, 0, 0, 1, 0, 0, 2, 0, 0, 3, 0, 0;
    Points query(1, 3);
    query << 0.1, 0, 0;
    CHECK(labels::upsample_majority(query, sampled, {5, 7, 7, 5}, 4) == LabelMap{5});
    CHECK(labels::upsample_majority(query, sampled, {7, 5, 5, 7}, 4) == LabelMap{7});
  }

  TEST_CASE("upsample on a two-cluster scene matches brute force") {
    Points sampled = testing::random_cloud(60, 10);
    sampled.bottomRows(30).array() += 3.0;
    Points query = testing::random_cloud(300, 11);
    query.bottomRows(150).array() += 3.0;
    std::vector<Label> lab(60);
    for (std::size_t i = 0; i < 60; ++i) lab[i] = i < 30 ? 1 + (i % 3 == 0) : 3;
    const auto out = labels::upsample_majority(query, sampled, lab, 4);
    CHECK(out == testing::brute_upsample(query, sampled, lab, 4));
    const std::set<Label> allowed(lab.begin(), lab.end());
    for (const Label l : out) CHECK(allowed.count(l));
  }

  TEST_CASE("upsample argument checks") {
    const Points none(0, 3);
    CHECK_THROWS_AS(labels::upsample_majority(testing::random_cloud(2, 1), none, {}, 4), ArgumentError);
    CHECK_THROWS_AS(labels::upsample_majority(testing::random_cloud(2, 1), testing::random_cloud(2, 2), {1}, 4), ArgumentError);
    CHECK_THROWS_AS(labels::upsample_majority(testing::random_cloud(2, 1), testing::random_cloud(2, 2), {1, 1}, 0), ArgumentError);
  }

  TEST_CASE("attach_background scatters and renumbers") {
    preprocess::ForegroundSplit split{{1, 3, 4}, {0, 2, 5}};
    const auto out = labels::attach_background({8, 2, 8}, split, 6);
    CHECK(out == LabelMap{0, 1, 0, 2, 1, 0});
    CHECK(std::count(out.begin(), out.end(), 0u) == 3);

    CHECK(labels::attach_background({4, 4, 9}, {{0, 1, 2}, {}}, 3) == LabelMap{1, 1, 2});
    CHECK(labels::attach_background({}, {{}, {0, 1}}, 2) == LabelMap{0, 0});
    CHECK_THROWS_AS(labels::attach_background({1}, {{0, 1}, {}}, 2), ArgumentError);
    CHECK_THROWS_AS(labels::attach_background({1}, {{5}, {}}, 2), ArgumentError);
  }

  TEST_CASE("consolidate merges the split chair and keeps the separate object") {
    const LabelMap base = blocks({1, 2, 3});
    const LabelMap under = blocks({1, 1, 2});
    CHECK(labels::consolidate(base, under, chair_graph(0.5), {}) == blocks({1, 1, 2}));
    // Repelling bridge: no merge.
    CHECK(labels::consolidate(base, under, chair_graph(-0.5), {}) == blocks({1, 2, 3}));
    // Mean exactly at the threshold is not enough.
    CHECK(labels::consolidate(base, under, chair_graph(0.0), {}) == blocks({1, 2, 3}));
    // Unsatisfiable coverage.
    CHECK(labels::consolidate(base, under, chair_graph(0.5), {0.0, 1.01}) == blocks({1, 2, 3}));
  }

  TEST_CASE("consolidate needs adjacency and shared coverage") {
    const LabelMap base = blocks({1, 2, 3});
    // Seat and object share an under instance but have no edges between them.
    CHECK(labels::consolidate(base, blocks({1, 2, 1}), chair_graph(0.5), {}) == blocks({1, 2, 3}));
    // Back split evenly between two under instances: coverage 0.5 < 0.6.
    LabelMap under = blocks({1, 1, 2});
    for (int i = 15; i < 20; ++i) under[i] = 2;
    CHECK(labels::consolidate(base, under, chair_graph(0.5), {}) == blocks({1, 2, 3}));
    CHECK(labels::consolidate(base, under, chair_graph(0.5), {0.0, 0.5}) == blocks({1, 1, 2}));
  }

  TEST_CASE("consolidate is idempotent on agreement and never splits") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
      LabelMap base(30), under(30);
      for (std::size_t i = 0; i < 30; ++i) {
        base[i] = static_cast<Label>(rng() % 5);
        under[i] = base[i] == 0 ? 0 : static_cast<Label>(1 + rng() % 2);
      }
      std::uniform_real_distribution<double> w(-1.0, 1.0);
      auto g = chair_graph(0.0);
      for (auto& e : g.edges) e.weight = w(rng);
      CHECK(labels::consolidate(base, base, g, {}) == labels::canonicalize(base));
      const auto out = labels::consolidate(base, under, g, {});
      std::map<Label, std::set<Label>> images;
      for (std::size_t i = 0; i < 30; ++i) {
        CHECK((out[i] == 0) == (base[i] == 0));
        if (base[i] != 0) images[base[i]].insert(out[i]);
      }
      for (const auto& [b, img] : images) CHECK(img.size() == 1);
      std::set<Label> in_ids, out_ids;
      for (std::size_t i = 0; i < 30; ++i) {
        if (base[i]) in_ids.insert(base[i]);
        if (out[i]) out_ids.insert(out[i]);
      }
      CHECK(out_ids.size() <= in_ids.size());
    }
  }

  TEST_CASE("consolidate rejects mismatched inputs") {
    const LabelMap base = blocks({1, 2, 3});
    LabelMap under = blocks({1, 1, 2});
    under[0] = 0;
    CHECK_THROWS_AS(labels::consolidate(base, under, chair_graph(0.5), {}), ArgumentError);
    CHECK_THROWS_AS(labels::consolidate(base, LabelMap(29, 1), chair_graph(0.5), {}), ArgumentError);
  }
}
