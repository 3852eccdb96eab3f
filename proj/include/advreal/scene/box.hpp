#pragma once

#include <algorithm>

namespace advreal::scene {

/// Pixel-space box, origin top-left, x right, y down.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  [[nodiscard]] double width() const { return x_max - x_min; }
  [[nodiscard]] double height() const { return y_max - y_min; }
  [[nodiscard]] double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  [[nodiscard]] double center_x() const { return 0.5 * (x_min + x_max); }
  [[nodiscard]] double center_y() const { return 0.5 * (y_min + y_max); }
  [[nodiscard]] bool valid() const { return x_min < x_max && y_min < y_max; }
  [[nodiscard]] bool inside(double w, double h) const {
    return x_min >= 0.0 && y_min >= 0.0 && x_max <= w && y_max <= h;
  }

  static BoundingBox from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

}  // namespace advreal::scene
