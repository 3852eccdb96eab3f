#include "advreal/scene/relight.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advreal/core/errors.hpp"
#include "advreal/scene/ssim.hpp"

namespace advreal::scene {
namespace {

constexpr int kParamCount = 8;  // alpha, beta, theta_sq[3], theta_bias[3]
using ParamVec = std::array<double, kParamCount>;

ParamVec pack(const RelightCoefficients& k) {
  return {k.alpha, k.beta, k.theta_sq[0], k.theta_sq[1], k.theta_sq[2], k.theta_bias[0], k.theta_bias[1],
          k.theta_bias[2]};
}

RelightCoefficients unpack(const ParamVec& p) {
  RelightCoefficients k;
  k.alpha = p[0];
  k.beta = p[1];
  for (int c = 0; c < 3; ++c) {
    k.theta_sq[c] = p[2 + c];
    k.theta_bias[c] = p[5 + c];
  }
  return k;
}

double raw_value(double v, const RelightCoefficients& k, int c, double bias_mean) {
  return k.alpha * v + k.beta + k.theta_sq[c] * v * v + (k.theta_bias[c] - bias_mean);
}

double bias_mean(const RelightCoefficients& k) {
  return (k.theta_bias[0] + k.theta_bias[1] + k.theta_bias[2]) / 3.0;
}

bool selected(const Mask* mask, std::size_t p) { return mask == nullptr || mask->data[p] != 0; }

void check_channels(const Image& img) {
  if (img.channels != 3) throw DomainError("relighting expects RGB images");
}

double regulariser(const RelightCoefficients& k, const RelightParams& cfg) {
  return cfg.lambda_alpha * (k.alpha - 1.0) * (k.alpha - 1.0) + cfg.lambda_beta * k.beta * k.beta +
         cfg.lambda_theta * k.theta_norm_sq();
}

// Loss and gradient w.r.t. the packed parameters.
double loss_and_grad(const Image& render, const Image& real, const RelightCoefficients& k, const RelightParams& cfg,
                     const Mask* mask, ParamVec& grad) {
  const Image relit = apply_relight(render, k, mask, &real);
  Image g_img;
  const double s = ssim_with_gradient(relit, real, g_img);
  grad.fill(0.0);
  const double bm = bias_mean(k);
  const std::size_t n = render.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    if (!selected(mask, p)) continue;
    for (int c = 0; c < 3; ++c) {
      const double v = render.data[p * 3 + c];
      const double raw = raw_value(v, k, c, bm);
      if (raw <= 0.0 || raw >= 1.0) continue;
      const double g = -g_img.data[p * 3 + c];  // loss = 1 - ssim
      grad[0] += g * v;
      grad[1] += g;
      grad[2 + c] += g * v * v;
      for (int j = 0; j < 3; ++j) grad[5 + j] += g * ((j == c ? 1.0 : 0.0) - 1.0 / 3.0);
    }
  }
  grad[0] += 2.0 * cfg.lambda_alpha * (k.alpha - 1.0);
  grad[1] += 2.0 * cfg.lambda_beta * k.beta;
  for (int c = 0; c < 3; ++c) {
    grad[2 + c] += 2.0 * cfg.lambda_theta * k.theta_sq[c];
    grad[5 + c] += 2.0 * cfg.lambda_theta * k.theta_bias[c];
  }
  return (1.0 - s) + regulariser(k, cfg);
}

}  // namespace

double RelightCoefficients::theta_norm_sq() const {
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) acc += theta_sq[c] * theta_sq[c] + theta_bias[c] * theta_bias[c];
  return acc;
}

void RelightParams::validate() const {
  if (!(alpha_lo < alpha_hi)) throw DomainError("relight: alpha bounds must satisfy lo < hi");
  if (!(beta_lo < beta_hi)) throw DomainError("relight: beta bounds must satisfy lo < hi");
  if (iters < 1) throw DomainError("relight: iterations must be >= 1");
  if (!(lr > 0.0)) throw DomainError("relight: learning rate must be > 0");
}

Image apply_relight(const Image& img, const RelightCoefficients& k, const Mask* mask, const Image* outside) {
  check_channels(img);
  Image out = outside ? *outside : img;
  const double bm = bias_mean(k);
  const std::size_t n = img.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    if (!selected(mask, p)) continue;
    for (int c = 0; c < 3; ++c) {
      out.data[p * 3 + c] = std::clamp(raw_value(img.data[p * 3 + c], k, c, bm), 0.0, 1.0);
    }
  }
  return out;
}

Image relight_backward(const Image& img, const RelightCoefficients& k, const Image& grad_out, const Mask* mask) {
  Image g(img.width, img.height, img.channels, 0.0);
  const double bm = bias_mean(k);
  const std::size_t n = img.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    if (!selected(mask, p)) continue;
    for (int c = 0; c < 3; ++c) {
      const double v = img.data[p * 3 + c];
      const double raw = raw_value(v, k, c, bm);
      if (raw <= 0.0 || raw >= 1.0) continue;
      g.data[p * 3 + c] = grad_out.data[p * 3 + c] * (k.alpha + 2.0 * k.theta_sq[c] * v);
    }
  }
  return g;
}

double relight_loss(const Image& render, const Image& real, const RelightCoefficients& k, const RelightParams& cfg,
                    const Mask* mask) {
  const Image relit = apply_relight(render, k, mask, &real);
  return (1.0 - ssim(relit, real)) + regulariser(k, cfg);
}

RelightResult relight_optimize(const Image& render, const Image& real, const RelightParams& cfg, const Mask* mask) {
  cfg.validate();
  check_channels(render);
  if (!render.same_shape(real)) throw DomainError("relight: shape mismatch");

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ParamVec params = pack(cfg.init);
  ParamVec m{}, v{}, grad{};

  RelightResult res;
  double best = 0.0;
  ParamVec best_params = params;
  for (int t = 0; t <= cfg.iters; ++t) {
    const double loss = loss_and_grad(render, real, unpack(params), cfg, mask, grad);
    if (!std::isfinite(loss)) throw NumericalError("relight: non-finite loss at iteration " + std::to_string(t));
    if (t == 0) {
      res.initial_loss = loss;
      best = loss;
    } else if (loss < best) {
      best = loss;
      best_params = params;
      res.best_iteration = t;
    }
    if (t == cfg.iters) break;
    for (int i = 0; i < kParamCount; ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double mh = m[i] / (1.0 - std::pow(kBeta1, t + 1));
      const double vh = v[i] / (1.0 - std::pow(kBeta2, t + 1));
      params[i] -= cfg.lr * mh / (std::sqrt(vh) + kEps);
    }
    params[0] = std::clamp(params[0], cfg.alpha_lo, cfg.alpha_hi);
    params[1] = std::clamp(params[1], cfg.beta_lo, cfg.beta_hi);
  }
  res.coeffs = unpack(best_params);
  res.final_loss = best;
  res.relit = apply_relight(render, res.coeffs, mask, &real);
  return res;
}

}  // namespace advreal::scene
