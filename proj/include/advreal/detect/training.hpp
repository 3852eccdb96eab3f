#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "advreal/core/image.hpp"
#include "advreal/detect/detection.hpp"
#include "advreal/detect/toy_detector.hpp"

namespace advreal::detect {

struct DetectorSample {
  Image image;
  std::vector<BoundingBox> boxes;
};

struct DetectorLossWeights {
  double box = 2.0;
  double noobj = 1.0;
  double ignore_iou = 0.5;  // negatives whose predicted box overlaps a ground truth this much are skipped
};

/// YOLO-style objective: BCE objectness on the cell holding each box centre,
/// squared error on (sigmoid offsets, log scales) for that cell, BCE towards 0
/// elsewhere. Accumulates parameter gradients into `grads`.
double detector_loss(const ToyDetector& model, const DetectorSample& sample, const DetectorLossWeights& weights,
                     ToyDetector::Gradients& grads);

/// Adam over every parameter tensor of the detector.
class DetectorAdam {
 public:
  DetectorAdam(ToyDetector& model, double lr);
  void step(const ToyDetector::Gradients& grads, double scale);
  void set_lr(double lr) { lr_ = lr; }

 private:
  ToyDetector& model_;
  double lr_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace advreal::detect
