#pragma once

#include <functional>
#include <vector>

#include "advreal/core/image.hpp"
#include "advreal/core/rng.hpp"
#include "advreal/detect/detection.hpp"
#include "advreal/detect/shakedrop.hpp"
#include "advreal/detect/toy_detector.hpp"

namespace advreal::detect {

/// Scalar loss over post-NMS detections. Must write d loss / d confidence for
/// every detection into `dconf` (same length as `dets`).
using DetectionLoss = std::function<double(const std::vector<Detection>& dets, std::vector<double>& dconf)>;

struct InputGradient {
  double loss = 0.0;
  std::vector<Detection> detections;
  Image gradient;  // d loss / d image, HWC
};

/// Forward (shakedrop applied per residual block when enabled), loss over the
/// NMS-filtered detections, and backprop to the image. Throws NumericalError
/// on a non-finite loss or gradient.
InputGradient input_gradient(const ToyDetector& model, const Image& image, const DetectionLoss& loss,
                             const ShakedropCfg& shakedrop, Rng& rng);

}  // namespace advreal::detect
