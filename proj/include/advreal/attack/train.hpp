#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "advreal/attack/losses.hpp"
#include "advreal/attack/optimizer.hpp"
#include "advreal/attack/patch.hpp"
#include "advreal/attack/scene3d.hpp"
#include "advreal/attack/transform2d.hpp"
#include "advreal/detect/shakedrop.hpp"
#include "advreal/detect/toy_detector.hpp"

namespace advreal::attack {

struct PersonSample {
  Image image;
  BoundingBox box;
};

struct TrainSeeds {
  std::uint64_t patch = 1;
  std::uint64_t transforms = 2;
  std::uint64_t geometry = 3;
  std::uint64_t scene = 4;
};

struct TrainConfig {
  int rounds = 800;
  int batch_2d = 8;
  int batch_3d = 8;
  int patch_size = kDefaultPatchSize;
  double step = 0.01;
  StepMode mode = StepMode::kAdaptive;
  LossWeights weights;
  double tau = kDefaultTau;
  TransformRanges transforms;
  Scene3DConfig scene3d;
  detect::ShakedropCfg shakedrop{0.9, 0.5, true, 5};
  TrainSeeds seeds;

  void validate() const;
};

struct Item2D {
  const PersonSample* person = nullptr;
  Transform2D transform;
};

/// Everything the objective needs for one round, fixed before the gradient is taken.
struct RoundBatch {
  std::vector<Item2D> items_2d;
  std::vector<Scene3D> scenes_3d;
};

struct ObjectiveValue {
  LossBreakdown loss;
  Image grad;  // d total / d texel
  std::vector<BranchOutcome> outcomes_2d;
  std::vector<BranchOutcome> outcomes_3d;
};

/// total_loss over a fixed batch and its gradient w.r.t. the patch texels.
/// Shakedrop draws come from `shakedrop_rng` when enabled.
ObjectiveValue evaluate_objective(const RoundBatch& batch, const Image& patch, const detect::ToyDetector& detector,
                                  const LossWeights& weights, double tau, const detect::ShakedropCfg& shakedrop,
                                  Rng& shakedrop_rng);

/// Draws the 2D and 3D items for `round`, deterministic in (config seeds, round).
RoundBatch draw_round(const TrainConfig& cfg, int round, const std::vector<PersonSample>& persons,
                      const std::vector<Image>& backgrounds, const GarmentRig& rig, const Image& patch);

struct TraceRow {
  int round = 0;
  LossBreakdown loss;
};

struct TrainResult {
  Patch patch;
  std::vector<TraceRow> trace;
};

/// Raised when a round fails; carries the round index and the patch state
/// reached before it.
class TrainAborted : public std::runtime_error {
 public:
  TrainAborted(int round, Patch state, const std::string& what);
  int round;
  Patch state;
};

using RoundCallback = std::function<void(const TraceRow&, const Patch&)>;

/// Runs cfg.rounds rounds starting from `initial` (its iteration counter
/// gives the first round, so a saved state resumes where it stopped).
TrainResult train(const TrainConfig& cfg, const std::vector<PersonSample>& persons,
                  const std::vector<Image>& backgrounds, const detect::ToyDetector& detector, Patch initial,
                  const RoundCallback& on_round = {});

}  // namespace advreal::attack
