#pragma once

#include <array>
#include <vector>

#include "advreal/core/image.hpp"
#include "advreal/core/texture.hpp"
#include "advreal/geometry/humanoid.hpp"
#include "advreal/geometry/mesh.hpp"
#include "advreal/scene/box.hpp"
#include "advreal/scene/camera.hpp"

namespace advreal::scene {

using Rgb = std::array<double, 3>;

struct BodyColors {
  Rgb skin{0.80, 0.62, 0.50};
  Rgb shirt{0.25, 0.35, 0.60};
  Rgb pants{0.20, 0.20, 0.25};
};

inline constexpr double kAmbient = 0.3;
inline constexpr double kDiffuse = 0.7;

struct RenderOutput {
  Image render;                 // black where the model is absent
  Mask mask;
  std::vector<TexelTap> taps;   // garment pixels, in pixel order
  BoundingBox silhouette_box;   // tight pixel bounds of the mask
};

/// Perspective render of body + textured garment at `params`, positioned on
/// `target` and shrunk (never enlarged) so the silhouette fits inside it.
/// Lambertian shading with one fixed directional light plus ambient.
/// `texture` may be empty, in which case the garment takes the shirt colour.
RenderOutput rasterize(const geometry::BodyMesh& body, const geometry::GarmentMesh& garment, const Image& texture,
                       const RenderParams& params, const BoundingBox& target, const Camera& camera,
                       const BodyColors& colors = {});

/// Recomputes garment pixel values from the taps for a new texture; other
/// pixels keep their values. Equivalent to re-rendering with `texture`.
void retexture(RenderOutput& out, const Image& texture);

}  // namespace advreal::scene
