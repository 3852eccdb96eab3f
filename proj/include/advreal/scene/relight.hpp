#pragma once

#include <array>

#include "advreal/core/image.hpp"

namespace advreal::scene {

/// Photometric correction I' = alpha * I + beta + B_theta(I) with
/// B_theta(I)_c = theta_sq[c] * I_c^2 + (theta_bias[c] - mean(theta_bias)).
struct RelightCoefficients {
  double alpha = 1.0;
  double beta = 0.0;
  std::array<double, 3> theta_sq{0.0, 0.0, 0.0};
  std::array<double, 3> theta_bias{0.0, 0.0, 0.0};

  [[nodiscard]] double theta_norm_sq() const;
};

struct RelightParams {
  RelightCoefficients init;
  double alpha_lo = 0.5, alpha_hi = 1.5;
  double beta_lo = -0.3, beta_hi = 0.3;
  double lambda_alpha = 1e-3;
  double lambda_beta = 1e-3;
  double lambda_theta = 1e-3;
  double lr = 0.05;
  int iters = 200;

  void validate() const;
};

struct RelightResult {
  RelightCoefficients coeffs;
  Image relit;              // clamped to [0,1]
  double initial_loss = 0.0;
  double final_loss = 0.0;  // loss of the returned coefficients
  int best_iteration = 0;   // 0 = initial point
};

/// Applies the correction to every pixel (or only where `mask` is set, when
/// given) and clamps to [0,1]. Unmasked pixels are copied from `outside`
/// when provided.
Image apply_relight(const Image& img, const RelightCoefficients& k, const Mask* mask = nullptr,
                    const Image* outside = nullptr);

/// d apply_relight / d img, elementwise, given the upstream gradient.
Image relight_backward(const Image& img, const RelightCoefficients& k, const Image& grad_out,
                       const Mask* mask = nullptr);

/// L_tot = (1 - ssim(I', I_r)) + l_a (alpha - 1)^2 + l_b beta^2 + l_t |theta|^2.
double relight_loss(const Image& render, const Image& real, const RelightCoefficients& k, const RelightParams& cfg,
                    const Mask* mask = nullptr);

/// Adam descent on L_tot with alpha and beta clipped into their bounds after
/// every step; returns the lowest-loss iterate. With a mask, only masked
/// pixels are corrected and the rest come from `real`.
RelightResult relight_optimize(const Image& render, const Image& real, const RelightParams& cfg,
                               const Mask* mask = nullptr);

}  // namespace advreal::scene
