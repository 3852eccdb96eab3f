#include "advreal/attack/losses.hpp"

#include <cmath>

#include "advreal/core/errors.hpp"

namespace advreal::attack {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double mean_detection_loss(const std::vector<BranchOutcome>& batch, double tau) {
  if (batch.empty()) return 0.0;
  double s = 0.0;
  for (const auto& b : batch) s += detection_loss(b.detections, b.gt, tau);
  return s / static_cast<double>(batch.size());
}

}  // namespace

double detection_loss(const std::vector<Detection>& dets, const BoundingBox& gt, double tau, int* argmax) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau outside (0,1)");
  double best = 0.0;
  int idx = -1;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const auto& d = dets[i];
    if (d.label != detect::kPersonLabel) continue;
    if (detect::box_iou(d.box, gt) < tau) continue;
    if (idx < 0 || d.confidence > best) {
      best = d.confidence;
      idx = static_cast<int>(i);
    }
  }
  if (argmax) *argmax = idx;
  return idx < 0 ? 0.0 : best;
}

double tv_loss(const Image& patch, Image* grad) {
  if (grad) *grad = Image(patch.width, patch.height, patch.channels, 0.0);
  double s = 0.0;
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      for (int c = 0; c < patch.channels; ++c) {
        const double p = patch.at(x, y, c);
        if (y + 1 < patch.height) {
          const double d = patch.at(x, y + 1, c) - p;
          s += std::abs(d);
          if (grad) {
            grad->at(x, y + 1, c) += sign(d);
            grad->at(x, y, c) -= sign(d);
          }
        }
        if (x + 1 < patch.width) {
          const double d = patch.at(x + 1, y, c) - p;
          s += std::abs(d);
          if (grad) {
            grad->at(x + 1, y, c) += sign(d);
            grad->at(x, y, c) -= sign(d);
          }
        }
      }
    }
  }
  return s;
}

void LossWeights::validate() const {
  if (!(w_det2d >= 0.0 && w_det3d >= 0.0 && w_tv >= 0.0)) throw DomainError("loss weights must be nonnegative");
  if (!(w_det2d > 0.0 || w_det3d > 0.0 || w_tv > 0.0)) throw DomainError("at least one loss weight must be positive");
}

LossBreakdown total_loss(const std::vector<BranchOutcome>& batch_2d, const std::vector<BranchOutcome>& batch_3d,
                         const Image& patch, const LossWeights& weights, double tau) {
  weights.validate();
  LossBreakdown out;
  out.det2d = mean_detection_loss(batch_2d, tau);
  out.det3d = mean_detection_loss(batch_3d, tau);
  out.tv = patch.data.empty() ? 0.0 : tv_loss(patch) / static_cast<double>(patch.data.size());
  out.w_det2d = weights.w_det2d * out.det2d;
  out.w_det3d = weights.w_det3d * out.det3d;
  out.w_tv = weights.w_tv * out.tv;
  out.total = out.w_det2d + out.w_det3d + out.w_tv;
  return out;
}

}  // namespace advreal::attack
