#include "mcseg/labels.hpp"

#include "mcseg/error.hpp"
#include "mcseg/spatial.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace mcseg::labels {

MaskSet labels_to_masks(const LabelMap& labels) {
  std::map<Label, IndexList> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) by_id[labels[i]].push_back(static_cast<Index>(i));
  }
  MaskSet masks;
  masks.reserve(by_id.size());
  for (auto& [id, points] : by_id) masks.push_back({id, std::move(points)});
  return masks;
}

LabelMap masks_to_labels(const MaskSet& masks, std::size_t point_count) {
  LabelMap labels(point_count, 0);
  std::vector<Label> seen;
  for (const Mask& mask : masks) {
    if (mask.id == 0) throw ArgumentError("masks_to_labels: mask id 0 is reserved for background");
    if (std::find(seen.begin(), seen.end(), mask.id) != seen.end()) {
      throw ArgumentError("masks_to_labels: mask id " + std::to_string(mask.id) + " repeated");
    }
    seen.push_back(mask.id);
    for (const Index p : mask.points) {
      if (p >= point_count) throw ArgumentError("masks_to_labels: point index out of range");
      if (labels[p] != 0) {
        throw ArgumentError("masks_to_labels: point " + std::to_string(p) +
                            " belongs to masks " + std::to_string(labels[p]) + " and " +
                            std::to_string(mask.id));
      }
      labels[p] = mask.id;
    }
  }
  return labels;
}

LabelMap canonicalize(const LabelMap& labels) {
  std::unordered_map<Label, Label> remap;
  LabelMap out(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    const auto [it, inserted] = remap.try_emplace(labels[i], static_cast<Label>(remap.size() + 1));
    out[i] = it->second;
  }
  return out;
}

LabelMap upsample_majority(const Points& query_positions, const Points& sampled_positions,
                           const std::vector<Label>& sampled_labels, std::size_t k) {
  if (sampled_positions.rows() == 0) throw ArgumentError("upsample_majority: no sampled points");
  if (static_cast<std::size_t>(sampled_positions.rows()) != sampled_labels.size()) {
    throw ArgumentError("upsample_majority: sampled positions and labels differ in length");
  }
  if (k < 1) throw ArgumentError("upsample_majority: k must be at least 1");
  const std::size_t kk = std::min<std::size_t>(k, sampled_labels.size());

  const KdTree tree(sampled_positions);
  LabelMap out(static_cast<std::size_t>(query_positions.rows()));
  struct Vote {
    Label label;
    std::size_t count;
  };
  std::vector<Vote> votes;
  for (Eigen::Index q = 0; q < query_positions.rows(); ++q) {
    votes.clear();
    // Neighbors arrive nearest first, so `votes` lists labels by first
    // (closest) occurrence and the first maximum wins ties.
    for (const auto& nb : tree.knn(query_positions.row(q).data(), kk)) {
      const Label l = sampled_labels[nb.index];
      auto it = std::find_if(votes.begin(), votes.end(), [l](const Vote& v) { return v.label == l; });
      if (it == votes.end()) {
        votes.push_back({l, 1});
      } else {
        ++it->count;
      }
    }
    const auto best = std::max_element(votes.begin(), votes.end(),
                                       [](const Vote& a, const Vote& b) { return a.count < b.count; });
    out[static_cast<std::size_t>(q)] = best->label;
  }
  return out;
}

LabelMap attach_background(const std::vector<Label>& fg_labels,
                           const preprocess::ForegroundSplit& split, std::size_t total_count) {
  if (fg_labels.size() != split.fg.size()) {
    throw ArgumentError("attach_background: " + std::to_string(fg_labels.size()) +
                        " labels for " + std::to_string(split.fg.size()) + " foreground points");
  }
  LabelMap out(total_count, 0);
  std::unordered_map<Label, Label> remap;
  for (std::size_t i = 0; i < split.fg.size(); ++i) {
    const Index p = split.fg[i];
    if (p >= total_count) {
      throw ArgumentError("attach_background: foreground index " + std::to_string(p) +
                          " out of range");
    }
    const auto [it, inserted] =
        remap.try_emplace(fg_labels[i], static_cast<Label>(remap.size() + 1));
    out[p] = it->second;
  }
  for (const Index p : split.bg) {
    if (p >= total_count) {
      throw ArgumentError("attach_background: background index " + std::to_string(p) +
                          " out of range");
    }
    out[p] = 0;
  }
  return out;
}

LabelMap consolidate(const LabelMap& base, const LabelMap& under, const WeightedGraph& affinity,
                     const ConsolidateParams& params) {
  if (base.size() != under.size()) {
    throw ArgumentError("consolidate: label maps differ in length");
  }
  for (std::size_t i = 0; i < base.size(); ++i) {
    if ((base[i] == 0) != (under[i] == 0)) {
      throw ArgumentError("consolidate: background sets differ at point " + std::to_string(i));
    }
  }
  if (affinity.vertex_count != base.size()) {
    throw ArgumentError("consolidate: affinity graph has " +
                        std::to_string(affinity.vertex_count) + " vertices for " +
                        std::to_string(base.size()) + " points");
  }

  // Dense index per base instance, in order of first appearance.
  std::unordered_map<Label, std::size_t> slot;
  std::vector<std::size_t> size;
  std::vector<std::map<Label, std::size_t>> overlap;
  std::vector<std::size_t> slot_of(base.size(), 0);
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i] == 0) continue;
    const auto [it, inserted] = slot.try_emplace(base[i], size.size());
    if (inserted) {
      size.push_back(0);
      overlap.emplace_back();
    }
    slot_of[i] = it->second;
    ++size[it->second];
    ++overlap[it->second][under[i]];
  }
  const std::size_t count = size.size();

  constexpr Label kUnmapped = 0;
  std::vector<Label> parent_under(count, kUnmapped);
  for (std::size_t b = 0; b < count; ++b) {
    Label best = kUnmapped;
    std::size_t best_count = 0;
    for (const auto& [u, c] : overlap[b]) {
      if (c > best_count) {
        best = u;
        best_count = c;
      }
    }
    if (static_cast<double>(best_count) >= params.cover_frac * static_cast<double>(size[b])) {
      parent_under[b] = best;
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> contact;
  for (const Edge& e : affinity.edges) {
    if (base[e.u] == 0 || base[e.v] == 0) continue;
    std::size_t a = slot_of[e.u], b = slot_of[e.v];
    if (a == b || parent_under[a] == kUnmapped || parent_under[a] != parent_under[b]) continue;
    if (b < a) std::swap(a, b);
    auto& [sum, n] = contact[{a, b}];
    sum += e.weight;
    ++n;
  }

  std::vector<std::size_t> root(count);
  std::iota(root.begin(), root.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (const auto& [pair, stats] : contact) {
    const double mean = stats.first / static_cast<double>(stats.second);
    if (mean > params.aff_threshold) {
      const std::size_t ra = find(pair.first), rb = find(pair.second);
      if (ra != rb) root[std::max(ra, rb)] = std::min(ra, rb);
    }
  }

  LabelMap merged(base.size(), 0);
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i] != 0) merged[i] = static_cast<Label>(find(slot_of[i]) + 1);
  }
  return canonicalize(merged);
}

}  // namespace mcseg::labels
