#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "advreal/core/rng.hpp"
#include "advreal/detect/tensor.hpp"

namespace advreal::detect {

/// Square-kernel convolution lowered to a GEMM over an im2col buffer.
struct Conv2d {
  std::string name;
  int in_ch = 0, out_ch = 0, kernel = 1, stride = 1, pad = 0;
  std::vector<double> weight;  // out_ch x (in_ch * kernel * kernel), row-major
  std::vector<double> bias;    // out_ch

  Conv2d() = default;
  Conv2d(std::string n, int in, int out, int k, int s, int p);

  [[nodiscard]] int out_size(int in) const { return (in + 2 * pad - kernel) / stride + 1; }
  [[nodiscard]] std::size_t param_count() const { return weight.size() + bias.size(); }

  /// He-uniform weights scaled by `gain`, zero bias.
  void init(Rng& rng, double gain = 1.0);

  /// Writes the im2col buffer used by backward into `col`.
  Tensor forward(const Tensor& x, std::vector<double>& col) const;

  /// Gradient w.r.t. the input. Accumulates weight/bias gradients when the
  /// pointers are non-null.
  Tensor backward(const Tensor& grad_out, const std::vector<double>& col, int in_h, int in_w,
                  std::vector<double>* grad_w = nullptr, std::vector<double>* grad_b = nullptr) const;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// x * sigmoid(x), elementwise.
Tensor silu(const Tensor& x);
/// Gradient of silu at `pre` (the pre-activation).
Tensor silu_backward(const Tensor& pre, const Tensor& grad_out);

}  // namespace advreal::detect
