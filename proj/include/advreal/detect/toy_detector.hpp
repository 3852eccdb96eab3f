#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "advreal/core/image.hpp"
#include "advreal/core/rng.hpp"
#include "advreal/detect/detection.hpp"
#include "advreal/detect/layers.hpp"
#include "advreal/detect/shakedrop.hpp"
#include "advreal/detect/tensor.hpp"

namespace advreal::detect {

/// Grid-anchor single-stage person scorer.
///
///   stem   8x8/8 conv  3 -> 16, SiLU          52 x 52
///   res1   [3x3 conv, SiLU, 3x3 conv] 16 ch   52 x 52
///   down1  2x2/2 conv 16 -> 32, SiLU          26 x 26
///   res2   32 ch                              26 x 26
///   down2  2x2/2 conv 32 -> 32, SiLU          13 x 13
///   res3   32 ch                              13 x 13
///   head   1x1 conv 32 -> 5 (objectness, tx, ty, tw, th)
///
/// Each residual block computes x + c * H(x) where c is the shakedrop
/// coefficient (exactly 1 when shakedrop is off).
class ToyDetector {
 public:
  static constexpr int kInputSize = 416;
  static constexpr int kStride = 32;
  static constexpr int kGrid = kInputSize / kStride;
  static constexpr int kOutputs = 5;
  static constexpr int kResidualBlocks = 3;
  static constexpr double kAnchorW = 110.0;
  static constexpr double kAnchorH = 270.0;

  struct ResBlock {
    Conv2d conv1;
    Conv2d conv2;
  };

  /// Intermediate activations of one forward pass, consumed by backward.
  struct Cache {
    Tensor input;
    std::vector<double> stem_col;
    Tensor stem_pre;
    struct Block {
      Tensor x;
      std::vector<double> col1, col2;
      Tensor pre1;
      Tensor h;
    };
    std::array<Block, kResidualBlocks> blocks;
    std::array<std::vector<double>, 2> down_col;
    std::array<Tensor, 2> down_pre;
    std::vector<double> head_col;
    Tensor head_out;
    std::array<ShakedropDraw, kResidualBlocks> draws;
  };

  /// Parameter gradients, laid out like params().
  struct Gradients {
    std::vector<std::vector<double>> tensors;
  };

  ToyDetector();

  /// Deterministic random initialisation.
  void init(std::uint64_t seed);

  /// Runs the network and returns the raw 5 x 13 x 13 head output. `draws`
  /// supplies one shakedrop draw per residual block.
  Tensor forward(const Image& image, const std::array<ShakedropDraw, kResidualBlocks>& draws, Cache& cache) const;

  /// Backpropagates d loss / d head_out to the input image (HWC layout).
  /// When `grads` is non-null, parameter gradients are accumulated into it.
  Image backward(const Cache& cache, const Tensor& grad_head, Gradients* grads = nullptr) const;

  /// Post-sigmoid decoding of every grid cell (no floor, no NMS).
  [[nodiscard]] std::vector<Detection> decode(const Tensor& head) const;

  /// Full inference: forward with shakedrop off, decode, floor 0.01, NMS 0.45.
  [[nodiscard]] std::vector<Detection> detect(const Image& image) const;

  /// Mutable views on every parameter tensor, in a fixed order.
  std::vector<std::vector<double>*> params();
  [[nodiscard]] std::vector<const Conv2d*> layers() const;
  std::vector<Conv2d*> layers();
  [[nodiscard]] Gradients zero_gradients() const;

  static std::array<ShakedropDraw, kResidualBlocks> identity_draws();
  static std::array<ShakedropDraw, kResidualBlocks> sample_draws(const ShakedropCfg& cfg, Rng& rng);

  void save(const std::filesystem::path& path) const;
  static ToyDetector load(const std::filesystem::path& path);

 private:
  Conv2d stem_;
  std::array<ResBlock, kResidualBlocks> blocks_;
  std::array<Conv2d, 2> downs_;
  Conv2d head_;
};

/// Converts an HWC image to a CHW tensor after validating its size.
Tensor image_to_tensor(const Image& image, int expected_size);

}  // namespace advreal::detect
