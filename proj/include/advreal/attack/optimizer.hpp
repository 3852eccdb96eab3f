#pragma once

#include <string>

#include "advreal/attack/patch.hpp"
#include "advreal/core/image.hpp"

namespace advreal::attack {

enum class StepMode { kSign, kAdaptive };

StepMode parse_step_mode(const std::string& name);
std::string to_string(StepMode mode);

struct AdaptiveMoments {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One descent step on the patch texels, then clamp to [0,1].
///   sign:     p <- p - step * sign(g)
///   adaptive: bias-corrected first/second moment update at rate `step`
/// Throws NumericalError (patch untouched) on a non-finite gradient.
void patch_step(Patch& patch, const Image& grad, StepMode mode, double step, const AdaptiveMoments& moments = {});

}  // namespace advreal::attack
