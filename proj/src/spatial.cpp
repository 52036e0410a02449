#include "mcseg/spatial.hpp"

#include "mcseg/error.hpp"

#include <algorithm>
#include <numeric>

namespace mcseg {
namespace {
constexpr Index kLeafSize = 12;
}

KdTree::KdTree(const Points& points, std::span<const Index> subset) {
  const std::size_t n = subset.empty() ? static_cast<std::size_t>(points.rows()) : subset.size();
  coords_.resize(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Index row = subset.empty() ? static_cast<Index>(i) : subset[i];
    if (row >= static_cast<std::size_t>(points.rows())) {
      throw ArgumentError("KdTree: subset index " + std::to_string(row) + " out of range");
    }
    for (int c = 0; c < 3; ++c) coords_[3 * i + c] = points(row, c);
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), Index{0});
  if (n > 0) {
    nodes_.reserve(2 * (n / kLeafSize + 1));
    build(0, static_cast<Index>(n));
  }
}

Index KdTree::build(Index begin, Index end) {
  const auto id = static_cast<Index>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  double lo[3], hi[3];
  for (int c = 0; c < 3; ++c) {
    lo[c] = hi[c] = coords_[3 * order_[begin] + c];
  }
  for (Index i = begin + 1; i < end; ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = coords_[3 * order_[i] + c];
      lo[c] = std::min(lo[c], v);
      hi[c] = std::max(hi[c], v);
    }
  }
  int axis = 0;
  for (int c = 1; c < 3; ++c) {
    if (hi[c] - lo[c] > hi[axis] - lo[axis]) axis = c;
  }
  if (hi[axis] == lo[axis]) return id;  // all coincident: keep as a leaf

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) {
                     const double va = coords_[3 * a + axis], vb = coords_[3 * b + axis];
                     return va < vb || (va == vb && a < b);
                   });
  const double split = coords_[3 * order_[mid] + axis];
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

std::vector<Neighbor> KdTree::knn(const double* query, std::size_t k,
                                  std::optional<Index> exclude) const {
  std::vector<Neighbor> heap;
  if (k == 0 || nodes_.empty()) return heap;
  heap.reserve(k + 1);
  search(0, query, k, exclude, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

void KdTree::search(Index node_id, const double* query, std::size_t k,
                    std::optional<Index> exclude, std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (Index i = node.begin; i < node.end; ++i) {
      const Index p = order_[i];
      if (exclude && *exclude == p) continue;
      const Neighbor cand{p, squared_distance(query, &coords_[3 * p])};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = query[node.axis] - node.split;
  // Points equal to the split value can sit on either side, so both children
  // are visited whenever the plane is within reach (including distance 0).
  const Index near = diff < 0 ? node.left : node.right;
  const Index far = diff < 0 ? node.right : node.left;
  search(near, query, k, exclude, heap);
  if (heap.size() < k || diff * diff <= heap.front().dist2) {
    search(far, query, k, exclude, heap);
  }
}

}  // namespace mcseg
