#include "advreal/detect/gradient.hpp"

#include <cmath>

#include "advreal/core/errors.hpp"

namespace advreal::detect {

InputGradient input_gradient(const ToyDetector& model, const Image& image, const DetectionLoss& loss,
                             const ShakedropCfg& shakedrop, Rng& rng) {
  const auto draws = ToyDetector::sample_draws(shakedrop, rng);
  ToyDetector::Cache cache;
  const Tensor head = model.forward(image, draws, cache);

  InputGradient out;
  out.detections = non_max_suppression(model.decode(head));
  std::vector<double> dconf(out.detections.size(), 0.0);
  out.loss = loss(out.detections, dconf);
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite detection loss");

  Tensor grad_head(head.c, head.h, head.w, 0.0);
  for (std::size_t i = 0; i < out.detections.size(); ++i) {
    if (dconf[i] == 0.0) continue;
    const int cell = out.detections[i].cell;
    const int gy = cell / ToyDetector::kGrid;
    const int gx = cell % ToyDetector::kGrid;
    const double s = out.detections[i].confidence;
    grad_head.at(0, gy, gx) += dconf[i] * s * (1.0 - s);
  }
  out.gradient = model.backward(cache, grad_head);
  for (double v : out.gradient.data) {
    if (!std::isfinite(v)) throw NumericalError("non-finite input gradient");
  }
  return out;
}

}  // namespace advreal::detect
