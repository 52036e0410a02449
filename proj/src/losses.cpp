#include "mcseg/losses.hpp"

#include "mcseg/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mcseg::losses {
namespace {

void check_probs(std::span<const double> probs, const char* what, const char* op) {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw ArgumentError(std::string(op) + ": " + what + " probability at point " +
                          std::to_string(i) + " is outside [0,1]");
    }
  }
}

void check_pair(std::span<const double> pred, std::span<const double> target, const char* op) {
  if (pred.size() != target.size()) {
    throw ArgumentError(std::string(op) + ": pred and target differ in length");
  }
  check_probs(pred, "pred", op);
  check_probs(target, "target", op);
}

void check_positions(const Points& positions, std::size_t n, const char* op) {
  if (static_cast<std::size_t>(positions.rows()) != n) {
    throw ArgumentError(std::string(op) + ": positions and masks differ in length");
  }
}

double mass(std::span<const double> probs, const char* what, const char* op) {
  double m = 0.0;
  for (const double p : probs) m += p;
  if (!(m > 0.0)) {
    throw DefinednessError(std::string(op) + ": " + what + " mask has zero total mass");
  }
  return m;
}

// Coordinates in the requested frame.
Points frame_coords(const Points& positions, Frame frame) {
  if (frame == Frame::Raw || positions.rows() == 0) return positions;
  Points out(positions.rows(), 3);
  for (int c = 0; c < 3; ++c) {
    const double lo = positions.col(c).minCoeff();
    const double extent = positions.col(c).maxCoeff() - lo;
    for (Eigen::Index i = 0; i < positions.rows(); ++i) {
      out(i, c) = extent > 0.0 ? (positions(i, c) - lo) / extent : 0.0;
    }
  }
  return out;
}

// Probability-weighted soft maximum of one coordinate column:
//   (1/beta) log( sum_i p_i exp(beta x_i) / sum_i p_i ),
// with the gradient with respect to every p_i.
struct SoftExtreme {
  double value = 0.0;
  std::vector<double> grad;
};

SoftExtreme soft_max(std::span<const double> probs, const Points& coords, int axis, double sign,
                     double beta, double total_mass) {
  const std::size_t n = probs.size();
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (probs[i] > 0.0) shift = std::max(shift, sign * coords(static_cast<Eigen::Index>(i), axis));
  }
  std::vector<double> e(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = std::exp(beta * (sign * coords(static_cast<Eigen::Index>(i), axis) - shift));
    if (probs[i] > 0.0) s += probs[i] * e[i];
  }
  SoftExtreme out;
  out.value = sign * (shift + std::log(s / total_mass) / beta);
  out.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.grad[i] = sign * (e[i] / s - 1.0 / total_mass) / beta;
  }
  return out;
}

}  // namespace

LossValue dice_loss(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, "dice_loss");
  double inter = 0.0, sp = 0.0, st = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * target[i];
    sp += pred[i];
    st += target[i];
  }
  const double num = 2.0 * inter + kDiceEps;
  const double den = sp + st + kDiceEps;
  LossValue out{1.0 - num / den, std::vector<double>(pred.size())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.grad[i] = -(2.0 * target[i] * den - num) / (den * den);
  }
  return out;
}

LossValue bce_loss(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, "bce_loss");
  LossValue out{0.0, std::vector<double>(pred.size(), 0.0)};
  if (pred.empty()) return out;
  const double n = static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kBceClamp, 1.0 - kBceClamp);
    const double t = target[i];
    sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    if (pred[i] > kBceClamp && pred[i] < 1.0 - kBceClamp) {
      out.grad[i] = (-t / p + (1.0 - t) / (1.0 - p)) / n;
    }
  }
  out.value = sum / n;
  return out;
}

LossValue center_loss(const Points& positions, std::span<const double> pred,
                      std::span<const double> target, Frame frame) {
  check_pair(pred, target, "center_loss");
  check_positions(positions, pred.size(), "center_loss");
  const double pm = mass(pred, "pred", "center_loss");
  const double tm = mass(target, "target", "center_loss");
  const Points x = frame_coords(positions, frame);

  Eigen::Vector3d cp = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    cp += pred[i] * x.row(i).transpose();
    ct += target[i] * x.row(i).transpose();
  }
  cp /= pm;
  ct /= tm;
  const Eigen::Vector3d d = cp - ct;
  const double dist = d.norm();

  LossValue out{dist, std::vector<double>(pred.size(), 0.0)};
  if (dist > 0.0) {
    const Eigen::Vector3d unit = d / dist;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out.grad[i] = unit.dot(x.row(i).transpose() - cp) / pm;
    }
  }
  return out;
}

LossValue box_loss(const Points& positions, std::span<const double> pred,
                   std::span<const double> target, double beta, Frame frame) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ArgumentError("box_loss: beta must be a positive finite number");
  }
  check_pair(pred, target, "box_loss");
  check_positions(positions, pred.size(), "box_loss");
  const double pm = mass(pred, "pred", "box_loss");
  const double tm = mass(target, "target", "box_loss");
  const Points x = frame_coords(positions, frame);

  LossValue out{0.0, std::vector<double>(pred.size(), 0.0)};
  for (const double sign : {1.0, -1.0}) {  // max corner, then min corner
    std::array<SoftExtreme, 3> corner;
    Eigen::Vector3d d;
    for (int a = 0; a < 3; ++a) {
      corner[a] = soft_max(pred, x, a, sign, beta, pm);
      d[a] = corner[a].value - soft_max(target, x, a, sign, beta, tm).value;
    }
    const double dist = d.norm();
    out.value += dist;
    if (dist > 0.0) {
      for (int a = 0; a < 3; ++a) {
        const double w = d[a] / dist;
        for (std::size_t i = 0; i < pred.size(); ++i) out.grad[i] += w * corner[a].grad[i];
      }
    }
  }
  return out;
}

LossValue total_loss(const Points& positions, std::span<const double> pred,
                     std::span<const double> target, const LossWeights& weights, double beta,
                     Frame frame) {
  for (const double w : {weights.dice, weights.bce, weights.mean, weights.box}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ArgumentError("total_loss: loss weights must be finite and non-negative");
    }
  }
  check_pair(pred, target, "total_loss");
  LossValue out{0.0, std::vector<double>(pred.size(), 0.0)};
  auto add = [&](double weight, const LossValue& term) {
    out.value += weight * term.value;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += weight * term.grad[i];
  };
  if (weights.dice != 0.0) add(weights.dice, dice_loss(pred, target));
  if (weights.bce != 0.0) add(weights.bce, bce_loss(pred, target));
  if (weights.mean != 0.0) add(weights.mean, center_loss(positions, pred, target, frame));
  if (weights.box != 0.0) add(weights.box, box_loss(positions, pred, target, beta, frame));
  return out;
}

}  // namespace mcseg::losses
