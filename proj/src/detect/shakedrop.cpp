#include "advreal/detect/shakedrop.hpp"

#include "advreal/core/errors.hpp"

namespace advreal::detect {

void ShakedropCfg::validate() const {
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw DomainError("shakedrop p_s must be in [0, 1]");
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("shakedrop k must be in [0, 1)");
}

ShakedropDraw draw_shakedrop(const ShakedropCfg& cfg, Rng& rng) {
  ShakedropDraw d;
  d.gamma_fwd = bernoulli(rng, cfg.p_s);
  d.omega = cfg.k > 0.0 ? uniform(rng, 1.0 - cfg.k, 1.0 + cfg.k) : 1.0;
  d.gamma_bwd = bernoulli(rng, cfg.p_s);
  return d;
}

std::vector<double> shakedrop_forward(std::span<const double> x_in, const BlockFn& block, const ShakedropDraw& draw) {
  std::vector<double> h = block(x_in);
  const double coef = draw.forward_coefficient();
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = x_in[i] + coef * h[i];
  return h;
}

std::vector<double> shakedrop_backward(std::span<const double> g_out, const BlockFn& block_vjp,
                                       const ShakedropDraw& draw) {
  std::vector<double> g = block_vjp(g_out);
  const double coef = draw.backward_coefficient();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = g_out[i] + coef * g[i];
  return g;
}

}  // namespace advreal::detect
