#pragma once

#include <cstdint>
#include <vector>

#include "advreal/core/image.hpp"

namespace advreal {

/// One image pixel that reads the texture bilinearly at continuous texel
/// coordinates (x, y) (texel centres at integers), scaled by `gain`. Pixel
/// value = gain * bilinear(texture, x, y) for every channel, which makes the
/// pixel linear in the texels.
struct TexelTap {
  std::uint32_t pixel = 0;
  double x = 0.0;
  double y = 0.0;
  double gain = 1.0;
};

/// Bilinear read with clamp-to-edge addressing.
double sample_bilinear(const Image& tex, double x, double y, int c);

/// Adds `value` into `grad` at (x, y) with the bilinear weights used by sample_bilinear.
void scatter_bilinear(Image& grad, double x, double y, int c, double value);

/// Pulls a pixel-space gradient back onto the texture for every tap.
/// `grad_texture` must already have the texture's shape.
void backprop_taps(const std::vector<TexelTap>& taps, const Image& grad_pixels, Image& grad_texture);

}  // namespace advreal
