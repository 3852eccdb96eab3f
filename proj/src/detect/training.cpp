#include "advreal/detect/training.hpp"

#include <algorithm>
#include <cmath>

namespace advreal::detect {

double detector_loss(const ToyDetector& model, const DetectorSample& sample, const DetectorLossWeights& weights,
                     ToyDetector::Gradients& grads) {
  constexpr int g = ToyDetector::kGrid;
  constexpr double s = ToyDetector::kStride;
  ToyDetector::Cache cache;
  const Tensor head = model.forward(sample.image, ToyDetector::identity_draws(), cache);
  const auto decoded = model.decode(head);

  std::vector<int> owner(static_cast<std::size_t>(g) * g, -1);
  for (std::size_t b = 0; b < sample.boxes.size(); ++b) {
    const auto& box = sample.boxes[b];
    const int gx = std::clamp(static_cast<int>(box.center_x() / s), 0, g - 1);
    const int gy = std::clamp(static_cast<int>(box.center_y() / s), 0, g - 1);
    owner[gy * g + gx] = static_cast<int>(b);
  }

  Tensor grad(head.c, head.h, head.w, 0.0);
  double loss = 0.0;
  constexpr double kEps = 1e-12;
  for (int gy = 0; gy < g; ++gy) {
    for (int gx = 0; gx < g; ++gx) {
      const int cell = gy * g + gx;
      const double conf = sigmoid(head.at(0, gy, gx));
      if (owner[cell] >= 0) {
        const auto& box = sample.boxes[owner[cell]];
        loss -= std::log(conf + kEps);
        grad.at(0, gy, gx) += conf - 1.0;
        const double targets[4] = {box.center_x() / s - gx, box.center_y() / s - gy,
                                   std::log(box.width() / ToyDetector::kAnchorW),
                                   std::log(box.height() / ToyDetector::kAnchorH)};
        for (int k = 0; k < 2; ++k) {
          const double p = sigmoid(head.at(1 + k, gy, gx));
          const double diff = p - targets[k];
          loss += weights.box * diff * diff;
          grad.at(1 + k, gy, gx) += weights.box * 2.0 * diff * p * (1.0 - p);
        }
        for (int k = 2; k < 4; ++k) {
          const double diff = head.at(1 + k, gy, gx) - targets[k];
          loss += weights.box * diff * diff;
          grad.at(1 + k, gy, gx) += weights.box * 2.0 * diff;
        }
        continue;
      }
      double best = 0.0;
      for (const auto& box : sample.boxes) best = std::max(best, box_iou(decoded[cell].box, box));
      if (best > weights.ignore_iou) continue;
      loss -= weights.noobj * std::log(1.0 - conf + kEps);
      grad.at(0, gy, gx) += weights.noobj * conf;
    }
  }
  model.backward(cache, grad, &grads);
  return loss;
}

DetectorAdam::DetectorAdam(ToyDetector& model, double lr) : model_(model), lr_(lr) {
  for (auto* p : model_.params()) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void DetectorAdam::step(const ToyDetector::Gradients& grads, double scale) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto params = model_.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    const auto& gr = grads.tensors[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gv = gr[j] * scale;
      m_[i][j] = b1 * m_[i][j] + (1.0 - b1) * gv;
      v_[i][j] = b2 * v_[i][j] + (1.0 - b2) * gv * gv;
      p[j] -= lr_ * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + eps);
    }
  }
}

}  // namespace advreal::detect
