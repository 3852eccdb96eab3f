#include "advreal/attack/patch.hpp"

#include "advreal/core/errors.hpp"
#include "advreal/core/rng.hpp"

namespace advreal::attack {

Patch Patch::random_noise(int width, int height, std::uint64_t seed) {
  if (width < 1 || height < 1) throw DomainError("patch dimensions must be positive");
  Patch p;
  p.texels = Image(width, height, 3);
  p.rng_seed = seed;
  Rng rng(seed);
  // 8-bit levels, so the PNG artifact holds the patch exactly
  std::uniform_int_distribution<int> level(0, 255);
  for (auto& v : p.texels.data) v = level(rng) / 255.0;
  return p;
}

Patch Patch::constant(int width, int height, double value) {
  if (width < 1 || height < 1) throw DomainError("patch dimensions must be positive");
  if (!(value >= 0.0 && value <= 1.0)) throw DomainError("patch value outside [0,1]");
  Patch p;
  p.texels = Image(width, height, 3, value);
  return p;
}

}  // namespace advreal::attack
