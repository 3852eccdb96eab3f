#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace advreal {

/// Interleaved (HWC) floating point image. Values are nominally in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c = 3, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  [[nodiscard]] bool empty() const { return data.empty(); }
  [[nodiscard]] std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  [[nodiscard]] std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  [[nodiscard]] double at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  [[nodiscard]] bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  void clamp01() {
    for (auto& v : data) v = std::clamp(v, 0.0, 1.0);
  }
};

/// Binary per-pixel mask, 1 where the rendered model covers the pixel.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  [[nodiscard]] std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  [[nodiscard]] std::size_t count() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
  }
};

/// Axis-aligned crop; caller guarantees the rectangle lies inside the image.
Image crop(const Image& img, int x0, int y0, int w, int h);

/// Box-filter downsample so that the larger side is at most `max_side`.
Image downsample_to(const Image& img, int max_side);

}  // namespace advreal
