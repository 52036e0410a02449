#include "mcseg/preprocess.hpp"

#include "mcseg/error.hpp"
#include "mcseg/spatial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace mcseg::preprocess {
namespace {

Eigen::Vector3d row3(const Points& p, Index i) { return p.row(i).transpose(); }

// Sine of the angle between the two spanning vectors below which a
// three-point sample is treated as collinear.
constexpr double kCollinearSine = 1e-6;

struct Hypothesis {
  Eigen::Vector3d normal;
  double offset = 0.0;
  std::size_t support = 0;
};

}  // namespace

std::vector<Plane> segment_planes(const Points& positions, const PlaneParams& params) {
  const auto n = static_cast<std::size_t>(positions.rows());
  if (n < 3) throw ArgumentError("segment_planes: need at least 3 points");
  if (!(params.dist_thresh > 0.0)) throw ArgumentError("segment_planes: dist_thresh must be > 0");
  if (params.max_planes < 0 || params.iters < 0) {
    throw ArgumentError("segment_planes: max_planes and iters must be non-negative");
  }

  std::mt19937_64 rng(params.seed);
  const double min_support = params.min_inlier_frac * static_cast<double>(n);
  IndexList remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = static_cast<Index>(i);

  std::vector<Plane> planes;
  while (static_cast<int>(planes.size()) < params.max_planes && remaining.size() >= 3) {
    const std::size_t m = remaining.size();
    std::optional<Hypothesis> best;
    for (int it = 0; it < params.iters; ++it) {
      const std::size_t a = rng() % m;
      std::size_t b = rng() % (m - 1);
      if (b >= a) ++b;
      std::size_t c = rng() % (m - 2);
      for (const std::size_t taken : {std::min(a, b), std::max(a, b)}) {
        if (c >= taken) ++c;
      }
      const Eigen::Vector3d pa = row3(positions, remaining[a]);
      const Eigen::Vector3d ab = row3(positions, remaining[b]) - pa;
      const Eigen::Vector3d ac = row3(positions, remaining[c]) - pa;
      const Eigen::Vector3d cross = ab.cross(ac);
      const double scale = ab.norm() * ac.norm();
      if (scale == 0.0 || cross.norm() <= kCollinearSine * scale) continue;

      Eigen::Vector3d normal = cross.normalized();
      Eigen::Index major = 0;
      normal.cwiseAbs().maxCoeff(&major);
      if (normal[major] < 0) normal = -normal;
      const double offset = normal.dot(pa);

      std::size_t support = 0;
      for (const Index idx : remaining) {
        if (std::abs(normal.dot(row3(positions, idx)) - offset) <= params.dist_thresh) ++support;
      }
      if (!best || support > best->support) best = Hypothesis{normal, offset, support};
    }
    if (!best || static_cast<double>(best->support) < min_support) break;

    Plane plane{best->normal, best->offset, {}};
    IndexList rest;
    rest.reserve(m - best->support);
    for (const Index idx : remaining) {
      if (std::abs(plane.normal.dot(row3(positions, idx)) - plane.offset) <= params.dist_thresh) {
        plane.inliers.push_back(idx);
      } else {
        rest.push_back(idx);
      }
    }
    remaining.swap(rest);
    planes.push_back(std::move(plane));
  }
  return planes;
}

ForegroundSplit split_foreground(std::size_t point_count, const std::vector<Plane>& planes) {
  std::vector<bool> is_bg(point_count, false);
  for (const auto& plane : planes) {
    for (const Index i : plane.inliers) {
      if (i >= point_count) throw ArgumentError("split_foreground: inlier index out of range");
      is_bg[i] = true;
    }
  }
  ForegroundSplit split;
  for (std::size_t i = 0; i < point_count; ++i) {
    (is_bg[i] ? split.bg : split.fg).push_back(static_cast<Index>(i));
  }
  return split;
}

IndexList farthest_point_sample(const Points& positions, const IndexList& subset,
                                std::size_t target_count, Index start) {
  if (target_count > subset.size()) {
    throw ArgumentError("farthest_point_sample: target_count " + std::to_string(target_count) +
                        " exceeds subset size " + std::to_string(subset.size()));
  }
  for (const Index i : subset) {
    if (i >= static_cast<std::size_t>(positions.rows())) {
      throw ArgumentError("farthest_point_sample: subset index out of range");
    }
  }
  IndexList sample;
  if (target_count == 0) return sample;
  const auto start_it = std::find(subset.begin(), subset.end(), start);
  if (start_it == subset.end()) throw ArgumentError("farthest_point_sample: start not in subset");

  const std::size_t m = subset.size();
  std::vector<double> min_dist(m, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(m, false);
  std::size_t current = static_cast<std::size_t>(start_it - subset.begin());
  sample.reserve(target_count);
  while (true) {
    taken[current] = true;
    sample.push_back(subset[current]);
    if (sample.size() == target_count) break;
    const double* cur = positions.row(subset[current]).data();
    std::size_t next = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (taken[j]) continue;
      const double d = squared_distance(cur, positions.row(subset[j]).data());
      if (d < min_dist[j]) min_dist[j] = d;
      if (next == m || min_dist[j] > min_dist[next] ||
          (min_dist[j] == min_dist[next] && subset[j] < subset[next])) {
        next = j;
      }
    }
    current = next;
  }
  return sample;
}

Normals estimate_normals(const Points& positions, const IndexList& subset, std::size_t k) {
  if (k < 3) throw ArgumentError("estimate_normals: k must be at least 3");
  if (subset.size() <= k) {
    throw ArgumentError("estimate_normals: subset of " + std::to_string(subset.size()) +
                        " points is too small for k = " + std::to_string(k));
  }
  const KdTree tree(positions, subset);
  Normals out;
  out.normals.resize(static_cast<Eigen::Index>(subset.size()), 3);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const auto nbrs = tree.knn(positions.row(subset[i]).data(), k);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& nb : nbrs) mean += row3(positions, subset[nb.index]);
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      const Eigen::Vector3d d = row3(positions, subset[nb.index]) - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    const auto r = static_cast<Eigen::Index>(i);
    if (cov.trace() <= 1e-20 * std::max(1.0, mean.squaredNorm())) {
      out.normals.row(r) = Eigen::RowVector3d(0.0, 0.0, 1.0);
      out.degenerate.push_back(static_cast<Index>(i));
      continue;
    }
    solver.compute(cov);
    out.normals.row(r) = solver.eigenvectors().col(0).normalized().transpose();
  }
  return out;
}

}  // namespace mcseg::preprocess
