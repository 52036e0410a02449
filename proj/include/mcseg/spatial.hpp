#pragma once

#include "mcseg/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mcseg {

struct Neighbor {
  Index index;   // position in the tree's point list
  double dist2;  // squared Euclidean distance

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Squared distance with a fixed summation order; every neighbor query in the
/// library goes through this so tie-breaking is reproducible.
inline double squared_distance(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/// Static 3-d tree answering exact k-nearest-neighbor queries. Results are
/// ordered by (distance, index), so equidistant points resolve to the smaller
/// index exactly as an exhaustive scan would.
class KdTree {
 public:
  /// Indexes the rows of `points` selected by `subset` (all rows when empty).
  /// Neighbor indices refer to positions within `subset`.
  explicit KdTree(const Points& points, std::span<const Index> subset = {});

  std::size_t size() const noexcept { return coords_.size() / 3; }

  std::vector<Neighbor> knn(const double* query, std::size_t k,
                            std::optional<Index> exclude = std::nullopt) const;

  std::vector<Neighbor> knn(const Eigen::Vector3d& query, std::size_t k,
                            std::optional<Index> exclude = std::nullopt) const {
    return knn(query.data(), k, exclude);
  }

 private:
  struct Node {
    Index begin = 0, end = 0;  // range into order_ (leaves)
    int axis = -1;             // -1 for leaves
    double split = 0.0;
    Index left = 0, right = 0;
  };

  Index build(Index begin, Index end);
  void search(Index node, const double* query, std::size_t k, std::optional<Index> exclude,
              std::vector<Neighbor>& heap) const;

  std::vector<double> coords_;  // packed xyz per tree point
  std::vector<Index> order_;
  std::vector<Node> nodes_;
};

}  // namespace mcseg
