#pragma once

#include <vector>

#include "advreal/core/image.hpp"
#include "advreal/detect/detection.hpp"

namespace advreal::attack {

using detect::Detection;
using scene::BoundingBox;

inline constexpr double kDefaultTau = 0.5;

/// Highest confidence among person detections with IoU >= tau against `gt`;
/// 0 when none qualifies. `argmax` receives the index of that detection or -1.
double detection_loss(const std::vector<Detection>& dets, const BoundingBox& gt, double tau = kDefaultTau,
                      int* argmax = nullptr);

/// Sum of absolute vertical and horizontal neighbour differences over all
/// channels. When `grad` is given it receives a subgradient (sign(0) = 0).
double tv_loss(const Image& patch, Image* grad = nullptr);

struct LossWeights {
  double w_det2d = 1.0;
  double w_det3d = 1.0;
  double w_tv = 2.5;

  void validate() const;
};

struct LossBreakdown {
  double det2d = 0.0;  // mean detection loss over the 2D batch
  double det3d = 0.0;  // mean detection loss over the 3D batch
  double tv = 0.0;     // tv_loss / number of texel values
  double total = 0.0;

  /// Weighted contributions, summing to total.
  double w_det2d = 0.0;
  double w_det3d = 0.0;
  double w_tv = 0.0;
};

struct BranchOutcome {
  std::vector<Detection> detections;
  BoundingBox gt;
};

/// w_det2d * mean L_det(2D) + w_det3d * mean L_det(3D) + w_tv * tv_loss / numel.
/// An empty batch contributes 0.
LossBreakdown total_loss(const std::vector<BranchOutcome>& batch_2d, const std::vector<BranchOutcome>& batch_3d,
                         const Image& patch, const LossWeights& weights, double tau = kDefaultTau);

}  // namespace advreal::attack
