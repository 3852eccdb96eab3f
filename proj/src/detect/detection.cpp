#include "advreal/detect/detection.hpp"

#include <algorithm>

namespace advreal::detect {

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

std::vector<Detection> non_max_suppression(std::vector<Detection> dets, double iou_thres, double floor) {
  std::erase_if(dets, [floor](const Detection& d) { return d.confidence < floor; });
  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.cell < b.cell;
  });
  std::vector<Detection> kept;
  for (const Detection& d : dets) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.label == d.label && box_iou(k.box, d.box) > iou_thres;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

}  // namespace advreal::detect
