// Training-loss formulas as pure evaluation functions: BCE, Dice, their sum,
// per-class focal loss, the triplet consistency term and the multi-task total.
// Probabilities are clipped to [eps, 1-eps] before any logarithm; sums are
// accumulated in double in a fixed order so results are run-to-run identical.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "foramtrace/grid.hpp"

namespace foramtrace {

struct ProbabilityTriplet {
  FloatGrid interior;
  FloatGrid boundary;
  FloatGrid background;

  const Dims& dims() const { return interior.dims(); }
  void require_aligned(const char* where) const {
    require_same_dims(interior.dims(), boundary.dims(), where);
    require_same_dims(interior.dims(), background.dims(), where);
  }
};

struct LossConfig {
  std::array<double, 3> lambda = {1.0, 1.0, 1.0};      // per-class MTL weights
  std::array<double, 3> alpha = {0.25, 0.5, 0.25};     // focal class weights
  std::array<double, 3> gamma = {2.0, 2.0, 2.0};       // focal focusing parameters
  double epsilon = 1e-7;                               // log clipping

  void validate() const {
    for (double v : lambda)
      if (!(v > 0)) throw grid_error("loss config: lambda must be > 0");
    for (double v : alpha)
      if (!(v > 0)) throw grid_error("loss config: alpha must be > 0");
    for (double v : gamma)
      if (!(v >= 0)) throw grid_error("loss config: gamma must be >= 0");
    if (!(epsilon > 0 && epsilon <= 1e-3))
      throw grid_error("loss config: epsilon must be in (0, 1e-3]");
  }
};

namespace loss_detail {

inline double clip(double p, double eps) { return std::min(std::max(p, eps), 1.0 - eps); }

inline void check_pair(const FloatGrid& p, const MaskGrid& g, const char* where) {
  require_same_dims(p.dims(), g.dims(), where);
  validate_probability(p, where);
  validate_mask(g, where);
}

}  // namespace loss_detail

inline double loss_bce(const FloatGrid& pred, const MaskGrid& gt, double epsilon = 1e-7) {
  loss_detail::check_pair(pred, gt, "loss_bce");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = loss_detail::clip(double(pred[i]), epsilon);
    sum += gt[i] != 0 ? std::log(p) : std::log(1.0 - p);
  }
  return -sum / double(pred.size());
}

inline double loss_dice(const FloatGrid& pred, const MaskGrid& gt) {
  loss_detail::check_pair(pred, gt, "loss_dice");
  double inter = 0.0, p2 = 0.0, g2 = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = double(pred[i]);
    const double g = gt[i] != 0 ? 1.0 : 0.0;
    inter += p * g;
    p2 += p * p;
    g2 += g * g;
  }
  if (p2 + g2 == 0.0) return 0.0;  // both empty: perfect agreement
  return 1.0 - 2.0 * inter / (p2 + g2);
}

inline double loss_plantseg(const FloatGrid& pred, const MaskGrid& gt,
                            double epsilon = 1e-7) {
  return loss_bce(pred, gt, epsilon) + loss_dice(pred, gt);
}

// Focal loss of one class map against its binary target. p is the predicted
// probability of the voxel's true label, so gamma = 0 reduces this to
// alpha-weighted cross-entropy.
inline double loss_focal(const FloatGrid& pred, const MaskGrid& gt, std::size_t cls,
                         const LossConfig& cfg = {}) {
  if (cls >= 3) throw grid_error("loss_focal: class index must be 0, 1 or 2");
  cfg.validate();
  loss_detail::check_pair(pred, gt, "loss_focal");
  const double alpha = cfg.alpha[cls], gamma = cfg.gamma[cls];
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double raw = gt[i] != 0 ? double(pred[i]) : 1.0 - double(pred[i]);
    const double p = loss_detail::clip(raw, cfg.epsilon);
    sum += alpha * std::pow(1.0 - p, gamma) * std::log(p);
  }
  return -sum / double(pred.size());
}

// Penalizes per-voxel probability mass away from 1 across the three maps;
// zero exactly when the raw (pre-clip) maps sum to one everywhere.
inline double loss_consistency(const ProbabilityTriplet& maps, double epsilon = 1e-7) {
  maps.require_aligned("loss_consistency");
  double sum = 0.0;
  for (std::size_t i = 0; i < maps.interior.size(); ++i) {
    const double total =
        double(maps.interior[i]) + double(maps.boundary[i]) + double(maps.background[i]);
    sum += std::log(std::max(total, epsilon));
  }
  return -sum / double(maps.interior.size());
}

struct MaskTriplet {
  MaskGrid interior;
  MaskGrid boundary;
  MaskGrid background;
};

inline double loss_mtl(const ProbabilityTriplet& pred, const MaskTriplet& gt,
                       const LossConfig& cfg = {}) {
  pred.require_aligned("loss_mtl");
  double total = 0.0;
  total += cfg.lambda[0] * loss_focal(pred.interior, gt.interior, 0, cfg);
  total += cfg.lambda[1] * loss_focal(pred.boundary, gt.boundary, 1, cfg);
  total += cfg.lambda[2] * loss_focal(pred.background, gt.background, 2, cfg);
  total += loss_consistency(pred, cfg.epsilon);
  return total;
}

}  // namespace foramtrace
