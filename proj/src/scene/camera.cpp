#include "advreal/scene/camera.hpp"

#include <cmath>
#include <numbers>

#include "advreal/core/errors.hpp"

namespace advreal::scene {

double azimuth_from_orientation(const Eigen::Vector2d& orient) {
  double a = std::atan2(-orient.x(), orient.y());
  if (a >= std::numbers::pi) a -= 2.0 * std::numbers::pi;
  return a;
}

Eigen::Vector2d orientation_from_azimuth(double azimuth) {
  return {-std::sin(azimuth), std::cos(azimuth)};
}

RenderParams derive_render_params(const BoundingBox& box, const Eigen::Vector2d& orient, const Camera& camera) {
  if (!(box.height() > 0.0)) throw DomainError("zero-height box");
  if (!(camera.focal > 0.0)) throw DomainError("focal length must be > 0");
  if (!(orient.norm() > 0.0)) throw DomainError("orientation must be non-zero");
  RenderParams p;
  p.orientation = orient.normalized();
  p.distance = camera.focal * kPersonHeight / box.height();
  if (p.distance < kMinDistance || p.distance > kMaxDistance) {
    p.distance = std::clamp(p.distance, kMinDistance, kMaxDistance);
    p.clamped = true;
  }
  p.scale = box.height() / kPersonHeight;
  p.azimuth = azimuth_from_orientation(p.orientation);
  p.elevation = std::atan((box.center_y() - camera.cy()) / camera.focal);
  return p;
}

}  // namespace advreal::scene
