#pragma once

#include <filesystem>

#include "advreal/core/image.hpp"

namespace advreal::harness {

/// Reads a PNG/JPEG as RGB in [0,1]. Throws IoError naming the path.
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG (values clamped to [0,1], rounded).
void write_png(const std::filesystem::path& path, const Image& img);

/// Round-trips through 8-bit quantisation, matching what write_png stores.
Image quantize8(const Image& img);

}  // namespace advreal::harness
