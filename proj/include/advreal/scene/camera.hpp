#pragma once

#include <Eigen/Core>

#include "advreal/scene/box.hpp"

namespace advreal::scene {

/// Pinhole camera with a level optical axis over a flat ground plane.
struct Camera {
  double focal = 416.0;  // pixels
  int width = 416;
  int height = 416;

  [[nodiscard]] double cx() const { return 0.5 * width; }
  [[nodiscard]] double cy() const { return 0.5 * height; }
};

inline constexpr double kPersonHeight = 1.75;  // metres
inline constexpr double kMinDistance = 1.0;
inline constexpr double kMaxDistance = 4.0;

struct RenderParams {
  double scale = 1.0;      // pixels per metre at the person's depth
  double distance = 2.0;   // metres
  double elevation = 0.0;  // radians, angle of the ray to the box centre below the optical axis
  double azimuth = 0.0;    // radians in [-pi, pi), 0 = facing the camera
  Eigen::Vector2d orientation{0.0, 1.0};  // (lateral, towards-camera) unit facing direction
  bool clamped = false;    // distance was clamped into [kMinDistance, kMaxDistance]
};

/// Azimuth for a ground-plane facing direction; (0, 1) faces the camera.
double azimuth_from_orientation(const Eigen::Vector2d& orient);
Eigen::Vector2d orientation_from_azimuth(double azimuth);

/// Inverts the pinhole law for `box` and the facing direction. Distance is
/// clamped into [1, 4] m with `clamped` set.
RenderParams derive_render_params(const BoundingBox& box, const Eigen::Vector2d& orient, const Camera& camera);

}  // namespace advreal::scene
