#include "advreal/scene/ssim.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "advreal/core/errors.hpp"

namespace advreal::scene {
namespace {

using Kernel = std::array<double, kSsimWindow>;

Kernel gaussian_kernel() {
  Kernel k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

const Kernel& kernel() {
  static const Kernel k = gaussian_kernel();
  return k;
}

// Single-channel plane with "valid" separable filtering and its adjoint.
struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  Plane(int w_, int h_, double fill = 0.0) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, fill) {}
  double& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane filter_valid(const Plane& in) {
  const auto& k = kernel();
  const int ow = in.w - kSsimWindow + 1;
  const int oh = in.h - kSsimWindow + 1;
  Plane tmp(ow, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * in(x + i, y);
      tmp(x, y) = acc;
    }
  }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * tmp(x, y + i);
      out(x, y) = acc;
    }
  }
  return out;
}

// Adjoint of filter_valid: spreads each output back over its window.
Plane filter_valid_adjoint(const Plane& g, int in_w, int in_h) {
  const auto& k = kernel();
  Plane tmp(g.w, in_h);
  for (int y = 0; y < g.h; ++y) {
    for (int x = 0; x < g.w; ++x) {
      const double val = g(x, y);
      for (int i = 0; i < kSsimWindow; ++i) tmp(x, y + i) += k[i] * val;
    }
  }
  Plane out(in_w, in_h);
  for (int y = 0; y < in_h; ++y) {
    for (int x = 0; x < g.w; ++x) {
      const double val = tmp(x, y);
      for (int i = 0; i < kSsimWindow; ++i) out(x + i, y) += k[i] * val;
    }
  }
  return out;
}

Plane channel_plane(const Image& img, int c) {
  Plane p(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) p(x, y) = img.at(x, y, c);
  }
  return p;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.w, a.h);
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

double ssim_impl(const Image& a, const Image& b, Image* grad_a) {
  if (!a.same_shape(b)) throw DomainError("ssim: shape mismatch");
  if (a.width < kSsimWindow || a.height < kSsimWindow) throw DomainError("ssim: image smaller than the 11x11 window");
  const int ow = a.width - kSsimWindow + 1;
  const int oh = a.height - kSsimWindow + 1;
  const double norm = 1.0 / (static_cast<double>(ow) * oh * a.channels);
  if (grad_a) *grad_a = Image(a.width, a.height, a.channels, 0.0);

  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    const Plane x = channel_plane(a, c);
    const Plane y = channel_plane(b, c);
    const Plane mx = filter_valid(x);
    const Plane my = filter_valid(y);
    const Plane exx = filter_valid(product(x, x));
    const Plane eyy = filter_valid(product(y, y));
    const Plane exy = filter_valid(product(x, y));

    Plane d_mu(ow, oh), d_xx(ow, oh), d_xy(ow, oh);
    for (std::size_t i = 0; i < mx.v.size(); ++i) {
      const double mu_x = mx.v[i], mu_y = my.v[i];
      const double sxx = exx.v[i] - mu_x * mu_x;
      const double syy = eyy.v[i] - mu_y * mu_y;
      const double sxy = exy.v[i] - mu_x * mu_y;
      const double num_l = 2.0 * mu_x * mu_y + kSsimC1;
      const double den_l = mu_x * mu_x + mu_y * mu_y + kSsimC1;
      const double num_c = 2.0 * sxy + kSsimC2;
      const double den_c = sxx + syy + kSsimC2;
      const double s = (num_l * num_c) / (den_l * den_c);
      total += s;
      if (!grad_a) continue;
      // Partial derivatives w.r.t. mu_x, sigma_xx, sigma_xy.
      const double ds_dmu = s * (2.0 * mu_y / num_l - 2.0 * mu_x / den_l);
      const double ds_dsxx = -s / den_c;
      const double ds_dsxy = s * 2.0 / num_c;
      // sigma_xx = E[x^2] - mu_x^2 and sigma_xy = E[xy] - mu_x mu_y.
      d_mu.v[i] = ds_dmu - 2.0 * mu_x * ds_dsxx - mu_y * ds_dsxy;
      d_xx.v[i] = ds_dsxx;
      d_xy.v[i] = ds_dsxy;
    }
    if (!grad_a) continue;
    const Plane g_mu = filter_valid_adjoint(d_mu, a.width, a.height);
    const Plane g_xx = filter_valid_adjoint(d_xx, a.width, a.height);
    const Plane g_xy = filter_valid_adjoint(d_xy, a.width, a.height);
    for (int yy = 0; yy < a.height; ++yy) {
      for (int xx = 0; xx < a.width; ++xx) {
        grad_a->at(xx, yy, c) = norm * (g_mu(xx, yy) + 2.0 * x(xx, yy) * g_xx(xx, yy) + y(xx, yy) * g_xy(xx, yy));
      }
    }
  }
  return total * norm;
}

}  // namespace

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim_with_gradient(const Image& a, const Image& b, Image& grad_a) { return ssim_impl(a, b, &grad_a); }

}  // namespace advreal::scene
