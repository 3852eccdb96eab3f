#include "advreal/scene/composite.hpp"

#include "advreal/core/errors.hpp"

namespace advreal::scene {

Image composite(const Image& render, const Mask& mask, const Image& background) {
  if (!render.same_shape(background) || mask.width != render.width || mask.height != render.height) {
    throw DomainError("composite: shape mismatch");
  }
  Image out = background;
  const std::size_t n = render.pixel_count();
  const int ch = render.channels;
  for (std::size_t p = 0; p < n; ++p) {
    if (mask.data[p] == 0) continue;
    for (int c = 0; c < ch; ++c) out.data[p * ch + c] = render.data[p * ch + c];
  }
  return out;
}

Image composite_backward_render(const Image& grad_out, const Mask& mask) {
  Image g(grad_out.width, grad_out.height, grad_out.channels, 0.0);
  const std::size_t n = grad_out.pixel_count();
  const int ch = grad_out.channels;
  for (std::size_t p = 0; p < n; ++p) {
    if (mask.data[p] == 0) continue;
    for (int c = 0; c < ch; ++c) g.data[p * ch + c] = grad_out.data[p * ch + c];
  }
  return g;
}

}  // namespace advreal::scene
