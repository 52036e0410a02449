#include "mcseg/error.hpp"
#include "mcseg/preprocess.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace mcseg;
using preprocess::PlaneParams;

namespace {

// z = 0 grid plus a small ball at z = 5.
Points floor_and_ball() {
  Points p(1050, 3);
  for (int i = 0; i < 1000; ++i) p.row(i) << (i % 40) * 0.05, (i / 40) * 0.05, 0.0;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.1);
  for (int i = 1000; i < 1050; ++i) p.row(i) << 1.0 + g(rng), 0.5 + g(rng), 5.0 + g(rng);
  return p;
}

// Least-squares plane normal of the given rows.
Eigen::Vector3d pca_normal(const Points& p, const IndexList& rows) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const Index r : rows) mean += p.row(r).transpose();
  mean /= static_cast<double>(rows.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Index r : rows) {
    const Eigen::Vector3d d = p.row(r).transpose() - mean;
    cov += d * d.transpose();
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov).eigenvectors().col(0);
}

double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::min(1.0, std::abs(a.dot(b)) / (a.norm() * b.norm()))) * 180.0 / std::numbers::pi;
}

IndexList iota_list(std::size_t n) {
  IndexList v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Index>(i);
  return v;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("floor plus ball yields exactly the floor plane") {
    const Points p = floor_and_ball();
    const auto planes = preprocess::segment_planes(p, {0.05, 0.05, 8, 1000, 0});
    REQUIRE(planes.size() == 1);
    CHECK(std::abs(std::abs(planes[0].normal.z()) - 1.0) < 1e-9);
    CHECK(planes[0].inliers == iota_list(1000));

    const auto split = preprocess::split_foreground(p.rows(), planes);
    IndexList ball;
    for (Index i = 1000; i < 1050; ++i) ball.push_back(i);
    CHECK(split.fg == ball);
    CHECK(split.bg == iota_list(1000));
  }

  TEST_CASE("identical points admit no plane") {
    const Points p = Points::Constant(100, 3, 0.3);
    CHECK(preprocess::segment_planes(p, {}).empty());
  }

  TEST_CASE("two orthogonal walls agree with a least-squares refit") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::normal_distribution<double> jitter(0.0, 0.003);
    Points p(1600, 3);
    for (int i = 0; i < 800; ++i) p.row(i) << u(rng), jitter(rng), u(rng);          // y = 0 wall
    for (int i = 800; i < 1600; ++i) p.row(i) << jitter(rng) - 0.5, u(rng), u(rng);  // x = -0.5 wall
    const auto planes = preprocess::segment_planes(p, {0.025, 0.05, 8, 1000, 7});
    REQUIRE(planes.size() == 2);
    for (const auto& plane : planes) {
      CHECK(angle_deg(plane.normal, pca_normal(p, plane.inliers)) < 2.0);
    }
    CHECK(std::abs(angle_deg(planes[0].normal, planes[1].normal) - 90.0) < 2.0);
  }

  TEST_CASE("plane invariants hold on random scenes") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Points p = testing::random_cloud(600, seed, 3.0);
      for (int i = 0; i < 300; ++i) p(i, 2) = 0.0;
      const PlaneParams params{0.04, 0.05, 4, 200, seed};
      const auto planes = preprocess::segment_planes(p, params);
      std::set<Index> seen;
      for (const auto& plane : planes) {
        CHECK(std::abs(plane.normal.norm() - 1.0) <= 1e-9);
        CHECK(plane.inliers.size() >= static_cast<std::size_t>(std::ceil(0.05 * 600)));
        for (const Index i : plane.inliers) {
          CHECK(std::abs(plane.normal.dot(p.row(i).transpose()) - plane.offset) <= params.dist_thresh);
          CHECK(seen.insert(i).second);
        }
      }
      const auto split = preprocess::split_foreground(p.rows(), planes);
      CHECK(split.fg.size() + split.bg.size() == 600);
      std::set<Index> all(split.fg.begin(), split.fg.end());
      all.insert(split.bg.begin(), split.bg.end());
      CHECK(all.size() == 600);

      // Same seed, same planes.
      const auto again = preprocess::segment_planes(p, params);
      REQUIRE(again.size() == planes.size());
      for (std::size_t k = 0; k < planes.size(); ++k) CHECK(again[k].inliers == planes[k].inliers);
    }
  }

  TEST_CASE("split edge cases") {
    const auto none = preprocess::split_foreground(5, {});
    CHECK(none.fg == iota_list(5));
    CHECK(none.bg.empty());
    preprocess::Plane all;
    all.inliers = iota_list(5);
    const auto full = preprocess::split_foreground(5, {all});
    CHECK(full.fg.empty());
    CHECK(full.bg == iota_list(5));
  }

  TEST_CASE("fps on unit square corners picks the opposite corner") {
    Points p(4, 3);
    p << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0;
    const auto s = preprocess::farthest_point_sample(p, iota_list(4), 2, 0);
    CHECK(s == IndexList{0, 3});
    const auto full = preprocess::farthest_point_sample(p, iota_list(4), 4, 0);
    CHECK(std::set<Index>(full.begin(), full.end()).size() == 4);
    CHECK_THROWS_AS(preprocess::farthest_point_sample(p, iota_list(4), 5, 0), ArgumentError);
  }

  TEST_CASE("fps matches a full rescan and is locally optimal at every step") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Points p = testing::random_cloud(200, seed);
      IndexList subset;
      for (Index i = 0; i < 200; i += 1 + static_cast<Index>(seed % 2)) subset.push_back(i);
      const std::size_t target = subset.size() / 2;
      const auto s = preprocess::farthest_point_sample(p, subset, target, subset[0]);
      CHECK(s == testing::brute_fps(p, subset, target, subset[0]));

      // Each pick is at maximal min-distance among the remaining candidates.
      std::set<Index> chosen{s[0]};
      for (std::size_t step = 1; step < s.size(); ++step) {
        auto min_d = [&](Index c) {
          double d = std::numeric_limits<double>::infinity();
          for (const Index q : chosen) d = std::min(d, testing::dist2(p, c, p, q));
          return d;
        };
        const double picked = min_d(s[step]);
        for (const Index c : subset) {
          if (!chosen.count(c)) CHECK(min_d(c) <= picked);
        }
        chosen.insert(s[step]);
      }
    }
  }

  TEST_CASE("normals of a dense plane are vertical") {
    Points p(900, 3);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 900; ++i) p.row(i) << u(rng), u(rng), 0.0;
    const auto n = preprocess::estimate_normals(p, iota_list(900), 16);
    CHECK(n.degenerate.empty());
    for (Eigen::Index i = 0; i < n.normals.rows(); ++i) {
      CHECK(angle_deg(n.normals.row(i).transpose(), Eigen::Vector3d::UnitZ()) < 1.0);
    }
  }

  TEST_CASE("normals of a dense sphere follow the analytic normal") {
    // Fibonacci sphere: near-uniform coverage of the unit sphere.
    const int count = 4000;
    Points p(count, 3);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      p.row(i) << r * std::cos(golden * i), r * std::sin(golden * i), z;
    }
    const auto n = preprocess::estimate_normals(p, iota_list(count), 16);
    CHECK(n.degenerate.empty());
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
      worst = std::max(worst, angle_deg(n.normals.row(i).transpose(), p.row(i).transpose()));
      CHECK(std::abs(n.normals.row(i).norm() - 1.0) < 1e-12);
    }
    CHECK(worst < 5.0);
  }

  TEST_CASE("coincident neighborhoods fall back to (0,0,1) and are flagged") {
    Points p(20, 3);
    for (int i = 0; i < 10; ++i) p.row(i) << 1.0, 2.0, 3.0;
    for (int i = 10; i < 20; ++i) p.row(i) << 50.0 + i, 0.0, 0.0;
    IndexList dup;
    for (Index i = 0; i < 10; ++i) dup.push_back(i);
    const auto n = preprocess::estimate_normals(p, dup, 4);
    CHECK(n.degenerate == dup);
    for (int i = 0; i < 10; ++i) CHECK(n.normals.row(i) == Eigen::RowVector3d(0, 0, 1));

    CHECK_THROWS_AS(preprocess::estimate_normals(p, dup, 2), ArgumentError);
    CHECK_THROWS_AS(preprocess::estimate_normals(p, dup, 10), ArgumentError);
  }
}
