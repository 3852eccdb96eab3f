#include "advreal/core/texture.hpp"

#include <algorithm>
#include <cmath>

namespace advreal {
namespace {

struct Bilinear {
  int x0, x1, y0, y1;
  double fx, fy;
};

Bilinear bilinear_at(int w, int h, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  return {x0, std::min(x0 + 1, w - 1), y0, std::min(y0 + 1, h - 1), x - x0, y - y0};
}

}  // namespace

double sample_bilinear(const Image& tex, double x, double y, int c) {
  const Bilinear b = bilinear_at(tex.width, tex.height, x, y);
  const double top = (1.0 - b.fx) * tex.at(b.x0, b.y0, c) + b.fx * tex.at(b.x1, b.y0, c);
  const double bot = (1.0 - b.fx) * tex.at(b.x0, b.y1, c) + b.fx * tex.at(b.x1, b.y1, c);
  return (1.0 - b.fy) * top + b.fy * bot;
}

void scatter_bilinear(Image& grad, double x, double y, int c, double value) {
  const Bilinear b = bilinear_at(grad.width, grad.height, x, y);
  grad.at(b.x0, b.y0, c) += (1.0 - b.fx) * (1.0 - b.fy) * value;
  grad.at(b.x1, b.y0, c) += b.fx * (1.0 - b.fy) * value;
  grad.at(b.x0, b.y1, c) += (1.0 - b.fx) * b.fy * value;
  grad.at(b.x1, b.y1, c) += b.fx * b.fy * value;
}

void backprop_taps(const std::vector<TexelTap>& taps, const Image& grad_pixels, Image& grad_texture) {
  const int channels = grad_texture.channels;
  for (const TexelTap& t : taps) {
    for (int c = 0; c < channels; ++c) {
      const double g = grad_pixels.data[static_cast<std::size_t>(t.pixel) * grad_pixels.channels + c] * t.gain;
      if (g != 0.0) scatter_bilinear(grad_texture, t.x, t.y, c, g);
    }
  }
}

}  // namespace advreal
