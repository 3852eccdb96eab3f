#include "advreal/detect/toy_detector.hpp"

#include <algorithm>
#include <cmath>

#include "advreal/core/errors.hpp"

namespace advreal::detect {
namespace {

constexpr double kMaxLogScale = 4.0;

void add_inplace(Tensor& a, const Tensor& b, double scale) {
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += scale * b.v[i];
}

}  // namespace

Tensor image_to_tensor(const Image& image, int expected_size) {
  if (image.width != expected_size || image.height != expected_size || image.channels != 3) {
    throw DomainError("detector expects a " + std::to_string(expected_size) + "x" + std::to_string(expected_size) +
                      " RGB image");
  }
  Tensor t(3, image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = image.at(x, y, c);
    }
  }
  return t;
}

ToyDetector::ToyDetector()
    : stem_("stem", 3, 16, 8, 8, 0),
      blocks_{ResBlock{Conv2d("res1.conv1", 16, 16, 3, 1, 1), Conv2d("res1.conv2", 16, 16, 3, 1, 1)},
              ResBlock{Conv2d("res2.conv1", 32, 32, 3, 1, 1), Conv2d("res2.conv2", 32, 32, 3, 1, 1)},
              ResBlock{Conv2d("res3.conv1", 32, 32, 3, 1, 1), Conv2d("res3.conv2", 32, 32, 3, 1, 1)}},
      downs_{Conv2d("down1", 16, 32, 2, 2, 0), Conv2d("down2", 32, 32, 2, 2, 0)},
      head_("head", 32, kOutputs, 1, 1, 0) {}

void ToyDetector::init(std::uint64_t seed) {
  Rng rng(seed);
  stem_.init(rng);
  for (auto& b : blocks_) {
    b.conv1.init(rng);
    b.conv2.init(rng, 0.1);
  }
  for (auto& d : downs_) d.init(rng);
  head_.init(rng, 0.1);
  head_.bias[0] = -4.0;  // start with low objectness everywhere
}

std::array<ShakedropDraw, ToyDetector::kResidualBlocks> ToyDetector::identity_draws() {
  std::array<ShakedropDraw, kResidualBlocks> d;
  d.fill(ShakedropDraw::identity());
  return d;
}

std::array<ShakedropDraw, ToyDetector::kResidualBlocks> ToyDetector::sample_draws(const ShakedropCfg& cfg, Rng& rng) {
  cfg.validate();
  if (!cfg.enabled) return identity_draws();
  std::array<ShakedropDraw, kResidualBlocks> d;
  for (auto& x : d) x = draw_shakedrop(cfg, rng);
  return d;
}

Tensor ToyDetector::forward(const Image& image, const std::array<ShakedropDraw, kResidualBlocks>& draws,
                            Cache& cache) const {
  cache.input = image_to_tensor(image, kInputSize);
  cache.draws = draws;
  cache.stem_pre = stem_.forward(cache.input, cache.stem_col);
  Tensor x = silu(cache.stem_pre);
  for (int b = 0; b < kResidualBlocks; ++b) {
    auto& cb = cache.blocks[b];
    cb.x = x;
    cb.pre1 = blocks_[b].conv1.forward(x, cb.col1);
    cb.h = blocks_[b].conv2.forward(silu(cb.pre1), cb.col2);
    add_inplace(x, cb.h, draws[b].forward_coefficient());
    if (b < 2) {
      cache.down_pre[b] = downs_[b].forward(x, cache.down_col[b]);
      x = silu(cache.down_pre[b]);
    }
  }
  cache.head_out = head_.forward(x, cache.head_col);
  return cache.head_out;
}

Image ToyDetector::backward(const Cache& cache, const Tensor& grad_head, Gradients* grads) const {
  auto grad_slot = [&](int index) -> std::vector<double>* { return grads ? &grads->tensors[index] : nullptr; };
  // params() order: stem(w,b), res1.conv1(w,b), res1.conv2(w,b), ..., down1, down2, head.
  constexpr int kStemSlot = 0;
  auto block_slot = [](int b, int conv) { return 2 + 4 * b + 2 * conv; };
  auto down_slot = [](int d) { return 2 + 4 * kResidualBlocks + 2 * d; };
  constexpr int kHeadSlot = 2 + 4 * kResidualBlocks + 4;

  const Tensor& last_x = cache.blocks[kResidualBlocks - 1].x;
  Tensor g = head_.backward(grad_head, cache.head_col, last_x.h, last_x.w, grad_slot(kHeadSlot),
                            grad_slot(kHeadSlot + 1));
  for (int b = kResidualBlocks - 1; b >= 0; --b) {
    const auto& cb = cache.blocks[b];
    if (b < 2) {
      // g is w.r.t. silu(down_pre[b]); the down conv consumed the block output.
      const Tensor gd = silu_backward(cache.down_pre[b], g);
      g = downs_[b].backward(gd, cache.down_col[b], cb.x.h, cb.x.w, grad_slot(down_slot(b)),
                             grad_slot(down_slot(b) + 1));
    }
    // Block output = x + c_f * H(x); gradient g_in = g + c_b * H^T g.
    const double cb_coef = cache.draws[b].backward_coefficient();
    Tensor gh = g;
    for (auto& v : gh.v) v *= cb_coef;
    const Tensor g_mid = blocks_[b].conv2.backward(gh, cb.col2, cb.pre1.h, cb.pre1.w, grad_slot(block_slot(b, 1)),
                                                   grad_slot(block_slot(b, 1) + 1));
    const Tensor g_pre1 = silu_backward(cb.pre1, g_mid);
    const Tensor g_x = blocks_[b].conv1.backward(g_pre1, cb.col1, cb.x.h, cb.x.w, grad_slot(block_slot(b, 0)),
                                                 grad_slot(block_slot(b, 0) + 1));
    add_inplace(g, g_x, 1.0);
  }
  const Tensor g_stem = silu_backward(cache.stem_pre, g);
  const Tensor g_in = stem_.backward(g_stem, cache.stem_col, cache.input.h, cache.input.w, grad_slot(kStemSlot),
                                     grad_slot(kStemSlot + 1));
  Image out(kInputSize, kInputSize, 3);
  for (int y = 0; y < kInputSize; ++y) {
    for (int x = 0; x < kInputSize; ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = g_in.at(c, y, x);
    }
  }
  return out;
}

std::vector<Detection> ToyDetector::decode(const Tensor& head) const {
  std::vector<Detection> out;
  out.reserve(static_cast<std::size_t>(kGrid) * kGrid);
  for (int gy = 0; gy < kGrid; ++gy) {
    for (int gx = 0; gx < kGrid; ++gx) {
      Detection d;
      d.cell = gy * kGrid + gx;
      d.confidence = sigmoid(head.at(0, gy, gx));
      const double cx = (gx + sigmoid(head.at(1, gy, gx))) * kStride;
      const double cy = (gy + sigmoid(head.at(2, gy, gx))) * kStride;
      const double w = kAnchorW * std::exp(std::clamp(head.at(3, gy, gx), -kMaxLogScale, kMaxLogScale));
      const double h = kAnchorH * std::exp(std::clamp(head.at(4, gy, gx), -kMaxLogScale, kMaxLogScale));
      BoundingBox b = BoundingBox::from_center(cx, cy, w, h);
      b.x_min = std::clamp(b.x_min, 0.0, kInputSize - 1.0);
      b.y_min = std::clamp(b.y_min, 0.0, kInputSize - 1.0);
      b.x_max = std::clamp(b.x_max, b.x_min + 1.0, static_cast<double>(kInputSize));
      b.y_max = std::clamp(b.y_max, b.y_min + 1.0, static_cast<double>(kInputSize));
      d.box = b;
      out.push_back(d);
    }
  }
  return out;
}

std::vector<Detection> ToyDetector::detect(const Image& image) const {
  Cache cache;
  const Tensor head = forward(image, identity_draws(), cache);
  return non_max_suppression(decode(head));
}

std::vector<const Conv2d*> ToyDetector::layers() const {
  std::vector<const Conv2d*> out{&stem_};
  for (const auto& b : blocks_) {
    out.push_back(&b.conv1);
    out.push_back(&b.conv2);
  }
  for (const auto& d : downs_) out.push_back(&d);
  out.push_back(&head_);
  return out;
}

std::vector<Conv2d*> ToyDetector::layers() {
  std::vector<Conv2d*> out{&stem_};
  for (auto& b : blocks_) {
    out.push_back(&b.conv1);
    out.push_back(&b.conv2);
  }
  for (auto& d : downs_) out.push_back(&d);
  out.push_back(&head_);
  return out;
}

std::vector<std::vector<double>*> ToyDetector::params() {
  std::vector<std::vector<double>*> out;
  for (Conv2d* l : layers()) {
    out.push_back(&l->weight);
    out.push_back(&l->bias);
  }
  return out;
}

ToyDetector::Gradients ToyDetector::zero_gradients() const {
  Gradients g;
  for (const Conv2d* l : layers()) {
    g.tensors.emplace_back(l->weight.size(), 0.0);
    g.tensors.emplace_back(l->bias.size(), 0.0);
  }
  return g;
}

}  // namespace advreal::detect
