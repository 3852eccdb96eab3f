#include "advreal/core/image.hpp"

#include <cmath>

#include "advreal/core/errors.hpp"

namespace advreal {

Image crop(const Image& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > img.width || y0 + h > img.height) {
    throw DomainError("crop rectangle outside image");
  }
  Image out(w, h, img.channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
    }
  }
  return out;
}

Image downsample_to(const Image& img, int max_side) {
  const int side = std::max(img.width, img.height);
  if (side <= max_side) return img;
  const int factor = (side + max_side - 1) / max_side;
  const int w = std::max(1, img.width / factor);
  const int h = std::max(1, img.height / factor);
  Image out(w, h, img.channels);
  const double norm = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) acc += img.at(x * factor + dx, y * factor + dy, c);
        }
        out.at(x, y, c) = acc * norm;
      }
    }
  }
  return out;
}

}  // namespace advreal
