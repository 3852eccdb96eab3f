#include "advreal/attack/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "advreal/core/errors.hpp"

namespace advreal::attack {

StepMode parse_step_mode(const std::string& name) {
  if (name == "sign") return StepMode::kSign;
  if (name == "adaptive") return StepMode::kAdaptive;
  throw DomainError("unknown step mode '" + name + "'");
}

std::string to_string(StepMode mode) { return mode == StepMode::kSign ? "sign" : "adaptive"; }

void patch_step(Patch& patch, const Image& grad, StepMode mode, double step, const AdaptiveMoments& moments) {
  if (!grad.same_shape(patch.texels)) throw DomainError("gradient shape differs from patch");
  if (!(step >= 0.0)) throw DomainError("step size must be nonnegative");
  for (double g : grad.data) {
    if (!std::isfinite(g)) throw NumericalError("non-finite patch gradient");
  }
  auto& p = patch.texels.data;
  if (mode == StepMode::kSign) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grad.data[i];
      const double s = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      p[i] = std::clamp(p[i] - step * s, 0.0, 1.0);
    }
  } else {
    if (!patch.adam_m.same_shape(patch.texels)) {
      patch.adam_m = Image(patch.texels.width, patch.texels.height, patch.texels.channels, 0.0);
      patch.adam_v = patch.adam_m;
      patch.adam_steps = 0;
    }
    const double t = static_cast<double>(patch.adam_steps + 1);
    const double c1 = 1.0 - std::pow(moments.beta1, t);
    const double c2 = 1.0 - std::pow(moments.beta2, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grad.data[i];
      double& m = patch.adam_m.data[i];
      double& v = patch.adam_v.data[i];
      m = moments.beta1 * m + (1.0 - moments.beta1) * g;
      v = moments.beta2 * v + (1.0 - moments.beta2) * g * g;
      const double mh = m / c1;
      const double vh = v / c2;
      p[i] = std::clamp(p[i] - step * mh / (std::sqrt(vh) + moments.eps), 0.0, 1.0);
    }
    ++patch.adam_steps;
  }
  ++patch.iteration;
}

}  // namespace advreal::attack
