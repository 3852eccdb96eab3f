#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "advreal/core/image.hpp"
#include "advreal/core/rng.hpp"
#include "advreal/core/texture.hpp"
#include "advreal/scene/box.hpp"

namespace advreal::attack {

using scene::BoundingBox;

inline constexpr double kOcclusionGray = 0.5;
inline constexpr double kPatchSizeFraction = 0.3;  // patch side relative to box height

struct Transform2D {
  double rotation = 0.0;   // radians
  double scale = 1.0;      // multiplies kPatchSizeFraction * box height
  double dx = 0.0;         // pixels
  double dy = 0.0;
  double occlusion = 0.0;  // occluded fraction of the patch area, [0,1)
  double noise = 0.0;      // stddev of additive pixel noise
  std::uint64_t noise_seed = 0;

  void validate() const;
};

struct TransformRanges {
  double max_rotation = 20.0 * std::numbers::pi / 180.0;
  double scale_lo = 0.8;
  double scale_hi = 1.2;
  double offset_fraction = 0.1;  // of box width/height
  double occlusion_probability = 0.3;
  double occlusion_fraction = 1.0 / 9.0;
  double max_noise = 0.03;

  void validate() const;
};

Transform2D sample_transform(const TransformRanges& ranges, const BoundingBox& box, Rng& rng);

/// Gray (0.5) square of side round(sqrt(fraction) * W) by round(sqrt(fraction) * H) at the patch centre.
Image occlude_center(const Image& patch, double fraction);

struct Placed2D {
  Image image;
  std::vector<TexelTap> taps;          // one per covered pixel, gain 1
  std::vector<std::uint8_t> saturated;  // per image element, 1 where noise pushed the value into the clamp
  int patch_width = 0;
  int patch_height = 0;
  double occlusion = 0.0;
  bool clipped = false;                 // the transformed patch extended past the image
};

/// Composites the transformed patch centred on `box` (plus offset). Pixels
/// are inverse-mapped and sampled bilinearly.
Placed2D apply_2d(const Image& patch, const Image& person, const BoundingBox& box, const Transform2D& t,
                  double size_fraction = kPatchSizeFraction);

/// Gradient w.r.t. the patch texels given the gradient w.r.t. the composited image.
Image backprop_2d(const Placed2D& placed, const Image& grad_image);

}  // namespace advreal::attack
