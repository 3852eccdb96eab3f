#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "advreal/core/rng.hpp"

namespace advreal::detect {

struct ShakedropCfg {
  double p_s = 0.9;  // P(gamma = 1)
  double k = 0.5;    // omega ~ U(1 - k, 1 + k)
  bool enabled = false;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Random variables for one residual block in one forward/backward pass.
/// gamma_fwd and gamma_bwd are independent Bernoulli(p_s) draws; omega is
/// shared by both passes.
struct ShakedropDraw {
  bool gamma_fwd = true;
  bool gamma_bwd = true;
  double omega = 1.0;

  /// gamma + omega - gamma * omega, evaluated exactly for gamma in {0, 1}.
  [[nodiscard]] double forward_coefficient() const { return gamma_fwd ? 1.0 : omega; }
  [[nodiscard]] double backward_coefficient() const { return gamma_bwd ? 1.0 : omega; }

  /// Identity draw used when shakedrop is disabled.
  static ShakedropDraw identity() { return {}; }
};

/// Draws gamma_fwd, then omega, then gamma_bwd from `rng`.
ShakedropDraw draw_shakedrop(const ShakedropCfg& cfg, Rng& rng);

using BlockFn = std::function<std::vector<double>(std::span<const double>)>;

/// x_out = x_in + coefficient * H(x_in).
std::vector<double> shakedrop_forward(std::span<const double> x_in, const BlockFn& block, const ShakedropDraw& draw);

/// g_in = g_out + coefficient * (dH/dx)^T g_out. `block_vjp` maps g_out to (dH/dx)^T g_out.
std::vector<double> shakedrop_backward(std::span<const double> g_out, const BlockFn& block_vjp,
                                       const ShakedropDraw& draw);

}  // namespace advreal::detect
