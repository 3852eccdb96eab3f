#pragma once

#include <optional>

#include <Eigen/Core>

#include "advreal/core/rng.hpp"
#include "advreal/scene/box.hpp"
#include "advreal/scene/camera.hpp"

namespace advreal::scene {

struct TimespacePlacement {
  BoundingBox human;
  BoundingBox near;
  BoundingBox far;
  Eigen::Vector2d orientation;
  double d_human = 0.0;
  double d_near = 0.0;
  double d_far = 0.0;
  double camera_height = 0.0;  // metres above ground
};

struct TimespaceOptions {
  double aspect = 0.4;         // width / height
  double aspect_jitter = 0.15;
  double fill = 0.9;           // largest allowed box height as a fraction of the image
  double min_step = 0.10;      // relative depth change to the near/far boxes
  double max_step = 0.25;
};

inline constexpr double kMinPersonPixels = 32.0;

/// Samples a person box plus near/far boxes along the facing direction. Box
/// heights follow h = f * H / d; all boxes lie inside the image. When
/// `orientation` is empty a uniformly random direction is drawn.
TimespacePlacement timespace_sample(const Camera& camera, Rng& rng,
                                    std::optional<Eigen::Vector2d> orientation = std::nullopt,
                                    const TimespaceOptions& opts = {});

/// Valid distance interval for `camera`: boxes at least kMinPersonPixels tall
/// and at most `fill` of the image height.
std::pair<double, double> feasible_distance_range(const Camera& camera, const TimespaceOptions& opts = {});

}  // namespace advreal::scene
