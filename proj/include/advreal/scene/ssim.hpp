#pragma once

#include "advreal/core/image.hpp"

namespace advreal::scene {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Mean SSIM over all fully-contained 11x11 Gaussian windows and all channels,
/// for images on a unit dynamic range.
double ssim(const Image& a, const Image& b);

/// Same value as ssim(a, b); also writes d ssim / d a into `grad_a`.
double ssim_with_gradient(const Image& a, const Image& b, Image& grad_a);

}  // namespace advreal::scene
