#include "advreal/detect/layers.hpp"

#include <cmath>

#include <Eigen/Core>

namespace advreal::detect {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

}  // namespace

Conv2d::Conv2d(std::string n, int in, int out, int k, int s, int p)
    : name(std::move(n)), in_ch(in), out_ch(out), kernel(k), stride(s), pad(p),
      weight(static_cast<std::size_t>(out) * in * k * k, 0.0), bias(static_cast<std::size_t>(out), 0.0) {}

void Conv2d::init(Rng& rng, double gain) {
  const double fan_in = static_cast<double>(in_ch) * kernel * kernel;
  const double limit = gain * std::sqrt(6.0 / fan_in);
  for (auto& w : weight) w = uniform(rng, -limit, limit);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Tensor Conv2d::forward(const Tensor& x, std::vector<double>& col) const {
  const int oh = out_size(x.h);
  const int ow = out_size(x.w);
  const int kk = in_ch * kernel * kernel;
  const int n = oh * ow;
  col.assign(static_cast<std::size_t>(kk) * n, 0.0);
  for (int ci = 0; ci < in_ch; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        double* row = col.data() + static_cast<std::size_t>((ci * kernel + ky) * kernel + kx) * n;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= x.h) continue;
          const double* src = x.v.data() + (static_cast<std::size_t>(ci) * x.h + iy) * x.w;
          double* dst = row + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < x.w) dst[ox] = src[ix];
          }
        }
      }
    }
  }
  Tensor out(out_ch, oh, ow);
  MapMat o(out.v.data(), out_ch, n);
  o.noalias() = ConstMapMat(weight.data(), out_ch, kk) * ConstMapMat(col.data(), kk, n);
  for (int co = 0; co < out_ch; ++co) o.row(co).array() += bias[co];
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out, const std::vector<double>& col, int in_h, int in_w,
                        std::vector<double>* grad_w, std::vector<double>* grad_b) const {
  const int oh = grad_out.h;
  const int ow = grad_out.w;
  const int kk = in_ch * kernel * kernel;
  const int n = oh * ow;
  ConstMapMat g(grad_out.v.data(), out_ch, n);
  if (grad_w) {
    MapMat gw(grad_w->data(), out_ch, kk);
    gw.noalias() += g * ConstMapMat(col.data(), kk, n).transpose();
  }
  if (grad_b) {
    for (int co = 0; co < out_ch; ++co) (*grad_b)[co] += g.row(co).sum();
  }
  RowMat dcol = ConstMapMat(weight.data(), out_ch, kk).transpose() * g;
  Tensor gin(in_ch, in_h, in_w);
  for (int ci = 0; ci < in_ch; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const double* row = dcol.data() + static_cast<std::size_t>((ci * kernel + ky) * kernel + kx) * n;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= in_h) continue;
          double* dst = gin.v.data() + (static_cast<std::size_t>(ci) * in_h + iy) * in_w;
          const double* src = row + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < in_w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
  return gin;
}

Tensor silu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.v) v = v * sigmoid(v);
  return y;
}

Tensor silu_backward(const Tensor& pre, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.v.size(); ++i) {
    const double s = sigmoid(pre.v[i]);
    g.v[i] *= s * (1.0 + pre.v[i] * (1.0 - s));
  }
  return g;
}

}  // namespace advreal::detect
