#pragma once

#include "mcseg/types.hpp"

#include <span>
#include <vector>

// Mask losses over soft masks (per-point probabilities in [0,1]) that share one
// point set. Every function returns the loss and its gradient with respect to
// the predicted probabilities.
namespace mcseg::losses {

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // d value / d pred[i]
};

/// Coordinates used by the geometric losses: scaled into the scene's
/// axis-aligned bounding box ([0,1] per axis) or taken as-is.
enum class Frame { BoundingBox, Raw };

inline constexpr double kDiceEps = 1e-6;
inline constexpr double kBceClamp = 1e-7;
inline constexpr double kDefaultBeta = 100.0;

/// 1 - (2 sum(p t) + eps) / (sum p + sum t + eps).
LossValue dice_loss(std::span<const double> pred, std::span<const double> target);

/// Mean binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
LossValue bce_loss(std::span<const double> pred, std::span<const double> target);

/// Distance between the probability-weighted centroids of the two masks.
LossValue center_loss(const Points& positions, std::span<const double> pred,
                      std::span<const double> target, Frame frame = Frame::BoundingBox);

/// Sum of the distances between the masks' max corners and min corners. The
/// per-axis extremes are soft: (1/beta) log of the probability-weighted mean
/// of exp(beta x), which tends to the hard max as beta grows.
LossValue box_loss(const Points& positions, std::span<const double> pred,
                   std::span<const double> target, double beta = kDefaultBeta,
                   Frame frame = Frame::BoundingBox);

struct LossWeights {
  double dice = 1.0;
  double bce = 1.0;
  double mean = 1.0;
  double box = 1.0;
};

LossValue total_loss(const Points& positions, std::span<const double> pred,
                     std::span<const double> target, const LossWeights& weights,
                     double beta = kDefaultBeta, Frame frame = Frame::BoundingBox);

}  // namespace mcseg::losses
