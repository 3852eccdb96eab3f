#pragma once

#include <cstdint>
#include <string>

#include "advreal/core/image.hpp"

namespace advreal::attack {

inline constexpr int kDefaultPatchSize = 300;

struct Patch {
  Image texels;             // H x W x 3 in [0,1]
  long iteration = 0;
  std::uint64_t rng_seed = 0;
  std::string provenance;   // config hash of the producing run
  Image adam_m;             // moment estimates, empty until the first adaptive step
  Image adam_v;
  long adam_steps = 0;      // updates folded into the moments

  /// Uniform noise on the 256 levels of an 8-bit image.
  static Patch random_noise(int width, int height, std::uint64_t seed);
  static Patch constant(int width, int height, double value);
};

}  // namespace advreal::attack
