#pragma once

#include "advreal/core/image.hpp"

namespace advreal::scene {

/// out = M * render + (1 - M) * background, per pixel and channel.
Image composite(const Image& render, const Mask& mask, const Image& background);

/// Gradient of a loss w.r.t. the render given its gradient w.r.t. the composite.
Image composite_backward_render(const Image& grad_out, const Mask& mask);

}  // namespace advreal::scene
