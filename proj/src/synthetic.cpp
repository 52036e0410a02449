#include "mcseg/synthetic.hpp"

#include "mcseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace mcseg::synthetic {
namespace {

// Uniform and Gaussian draws built directly on mt19937_64 so scenes are
// identical across standard library implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

Eigen::Vector3d hue_color(double hue) {
  const double h = std::fmod(hue, 1.0) * 6.0;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  constexpr double s = 0.8, v = 0.9;
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

}  // namespace

Scene planted_blobs(const BlobSceneParams& params) {
  if (params.blobs < 0 || params.points_per_blob < 1 || params.ground_points < 0 ||
      !(params.blob_sigma > 0.0) || !(params.extent > 0.0) ||
      !(params.color_noise >= 0.0)) {
    throw ArgumentError("planted_blobs: invalid scene parameters");
  }
  Sampler rng(params.seed);

  std::vector<Eigen::Vector3d> centers;
  for (int attempt = 0; static_cast<int>(centers.size()) < params.blobs; ++attempt) {
    if (attempt > 100000) {
      throw ArgumentError("planted_blobs: cannot place blobs at the requested separation");
    }
    const Eigen::Vector3d c(rng.uniform(0.0, params.extent), rng.uniform(0.0, params.extent),
                            rng.uniform(params.min_height, params.max_height));
    const bool clear = std::all_of(centers.begin(), centers.end(), [&](const Eigen::Vector3d& o) {
      return (o - c).norm() >= params.min_center_distance;
    });
    if (clear) centers.push_back(c);
  }

  std::vector<Eigen::Vector3d> pos, col;
  std::vector<Label> gt;
  auto add = [&](const Eigen::Vector3d& p, const Eigen::Vector3d& c, Label l) {
    pos.push_back(p);
    col.push_back(c);
    gt.push_back(l);
  };
  auto jitter = [&](const Eigen::Vector3d& c) {
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) out[i] = std::clamp(c[i] + params.color_noise * rng.gaussian(), 0.0, 1.0);
    return out;
  };

  for (int g = 0; g < params.ground_points; ++g) {
    const Eigen::Vector3d p(rng.uniform(-0.5, params.extent + 0.5),
                            rng.uniform(-0.5, params.extent + 0.5), 0.0);
    add(p, jitter(Eigen::Vector3d::Constant(0.5)), 0);
  }

  for (std::size_t b = 0; b < centers.size(); ++b) {
    const auto label = static_cast<Label>(b + 1);
    const double hue = 0.13 + 0.61803398874989485 * static_cast<double>(b);
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> parts;  // (center, color)
    if (params.split_blobs) {
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Eigen::Vector3d dir(std::cos(angle), std::sin(angle), 0.0);
      const Eigen::Vector3d half = 0.5 * params.split_offset * dir;
      parts.emplace_back(centers[b] - half, hue_color(hue));
      parts.emplace_back(centers[b] + half, hue_color(hue + 0.3));
    } else {
      parts.emplace_back(centers[b], hue_color(hue));
    }
    for (int i = 0; i < params.points_per_blob; ++i) {
      const auto& [center, color] = parts[static_cast<std::size_t>(i) % parts.size()];
      const Eigen::Vector3d offset(rng.gaussian(), rng.gaussian(), rng.gaussian());
      add(center + params.blob_sigma * offset, jitter(color), label);
    }
  }

  // Shuffle so foreground and background indices interleave.
  std::vector<std::size_t> order(pos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  Scene scene;
  scene.cloud.positions.resize(static_cast<Eigen::Index>(pos.size()), 3);
  scene.cloud.colors.resize(static_cast<Eigen::Index>(pos.size()), 3);
  scene.ground_truth.resize(pos.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    scene.cloud.positions.row(r) = pos[order[i]].transpose();
    scene.cloud.colors.row(r) = col[order[i]].transpose();
    scene.ground_truth[i] = gt[order[i]];
  }
  return scene;
}

}  // namespace mcseg::synthetic
