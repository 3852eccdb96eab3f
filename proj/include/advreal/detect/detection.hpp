#pragma once

#include <vector>

#include "advreal/scene/box.hpp"

namespace advreal::detect {

using scene::BoundingBox;

inline constexpr int kPersonLabel = 1;
inline constexpr double kConfidenceFloor = 0.01;
inline constexpr double kNmsIou = 0.45;

struct Detection {
  BoundingBox box;
  double confidence = 0.0;
  int label = kPersonLabel;
  int cell = -1;  // source grid cell, links the confidence back to the network output
};

double box_iou(const BoundingBox& a, const BoundingBox& b);

/// Greedy NMS in descending confidence (ties by ascending cell); drops
/// detections below `floor` first.
std::vector<Detection> non_max_suppression(std::vector<Detection> dets, double iou_thres = kNmsIou,
                                           double floor = kConfidenceFloor);

}  // namespace advreal::detect
