#pragma once

#include <optional>

#include "advreal/core/image.hpp"
#include "advreal/core/rng.hpp"
#include "advreal/geometry/control_points.hpp"
#include "advreal/geometry/humanoid.hpp"
#include "advreal/geometry/stress.hpp"
#include "advreal/geometry/tps.hpp"
#include "advreal/scene/camera.hpp"
#include "advreal/scene/rasterizer.hpp"
#include "advreal/scene/relight.hpp"
#include "advreal/scene/timespace.hpp"

namespace advreal::attack {

using scene::BoundingBox;

struct Scene3DConfig {
  double sigma_thres = 0.8;
  geometry::ControlSelection selection;
  geometry::TpsConfig tps;
  double offset_max = 0.25;   // control-point target offset magnitude bound, model units
  bool deform = true;
  scene::RelightParams relight;
  bool relight_enabled = true;
  int relight_max_side = 48;  // relighting runs on a downsampled crop of the person box
  scene::Camera camera;
  scene::TimespaceOptions timespace;

  void validate() const;
};

/// Body, garment and the quantities of the garment that do not change between samples.
struct GarmentRig {
  geometry::BodyMesh body;
  geometry::GarmentMesh garment;
  geometry::StressField stress;
  geometry::ControlPointSet control;

  static GarmentRig make(std::uint64_t seed, const Scene3DConfig& cfg);
};

/// One rendered training/eval scene. Relighting coefficients are fitted
/// when the scene is built and then held fixed.
struct Scene3D {
  Image background;
  scene::TimespacePlacement placement;
  scene::RenderParams params;
  scene::RenderOutput render;
  scene::RelightCoefficients relight;
  BoundingBox gt;  // tight silhouette box of the rendered person
};

/// deform -> timespace_sample -> derive_render_params -> rasterize -> relight fit.
/// `azimuth` pins the facing direction.
Scene3D build_scene3d(const Image& background, const Image& patch, const GarmentRig& rig, const Scene3DConfig& cfg,
                      Rng& rng, std::optional<double> azimuth = std::nullopt);

/// Re-textures the scene with `patch`, applies the fitted relighting on the
/// person and composites onto the background.
Image compose_scene3d(const Scene3D& s, const Image& patch);

/// Gradient w.r.t. the patch texels of a loss whose image gradient is `grad_image`.
Image backprop_scene3d(const Scene3D& s, const Image& patch, const Image& grad_image);

}  // namespace advreal::attack
