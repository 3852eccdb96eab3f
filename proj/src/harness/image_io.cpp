#include "advreal/harness/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include <opencv2/imgcodecs.hpp>

#include "advreal/core/errors.hpp"

namespace advreal::harness {
namespace {

unsigned char to_byte(double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

Image read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing image file: " + path.string());
  const cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw IoError("cannot decode image: " + path.string());
  Image img(m.cols, m.rows, 3);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = row[x][2 - c] / 255.0;  // BGR -> RGB
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 3 && img.channels != 1) throw DomainError("write_png expects 1 or 3 channels");
  cv::Mat m(img.height, img.width, img.channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.height; ++y) {
    auto* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < img.width; ++x) {
      if (img.channels == 3) {
        for (int c = 0; c < 3; ++c) row[x * 3 + (2 - c)] = to_byte(img.at(x, y, c));
      } else {
        row[x] = to_byte(img.at(x, y, 0));
      }
    }
  }
  // Keep the encoder choice independent of temporary suffixes.
  const std::string ext = ".png";
  std::vector<unsigned char> buf;
  if (!cv::imencode(ext, m, buf)) throw IoError("cannot encode PNG: " + path.string());
  FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw IoError("cannot write " + path.string());
  const std::size_t n = std::fwrite(buf.data(), 1, buf.size(), f);
  const bool ok = n == buf.size() && std::fclose(f) == 0;
  if (!ok) throw IoError("short write to " + path.string());
}

Image quantize8(const Image& img) {
  Image out = img;
  for (auto& v : out.data) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace advreal::harness
