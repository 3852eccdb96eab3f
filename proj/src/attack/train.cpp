#include "advreal/attack/train.hpp"

#include <string>

#include "advreal/core/errors.hpp"
#include "advreal/detect/gradient.hpp"

namespace advreal::attack {
namespace {

detect::DetectionLoss make_loss(const BoundingBox& gt, double tau) {
  return [gt, tau](const std::vector<Detection>& dets, std::vector<double>& dconf) {
    dconf.assign(dets.size(), 0.0);
    int idx = -1;
    const double v = detection_loss(dets, gt, tau, &idx);
    if (idx >= 0) dconf[static_cast<std::size_t>(idx)] = 1.0;
    return v;
  };
}

void accumulate(Image& into, const Image& g, double scale) {
  for (std::size_t i = 0; i < into.data.size(); ++i) into.data[i] += scale * g.data[i];
}

std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

void TrainConfig::validate() const {
  if (rounds < 0) throw DomainError("rounds must be nonnegative");
  if (batch_2d < 0 || batch_3d < 0 || batch_2d + batch_3d == 0) throw DomainError("invalid batch sizes");
  if (patch_size < 1) throw DomainError("patch_size must be positive");
  if (!(step > 0.0)) throw DomainError("step must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau outside (0,1)");
  weights.validate();
  transforms.validate();
  scene3d.validate();
  shakedrop.validate();
}

ObjectiveValue evaluate_objective(const RoundBatch& batch, const Image& patch, const detect::ToyDetector& detector,
                                  const LossWeights& weights, double tau, const detect::ShakedropCfg& shakedrop,
                                  Rng& shakedrop_rng) {
  ObjectiveValue out;
  out.grad = Image(patch.width, patch.height, patch.channels, 0.0);

  const double s2 = batch.items_2d.empty() ? 0.0 : weights.w_det2d / static_cast<double>(batch.items_2d.size());
  for (const Item2D& item : batch.items_2d) {
    const Placed2D placed = apply_2d(patch, item.person->image, item.person->box, item.transform);
    const auto g = detect::input_gradient(detector, placed.image, make_loss(item.person->box, tau), shakedrop,
                                          shakedrop_rng);
    out.outcomes_2d.push_back({g.detections, item.person->box});
    if (s2 != 0.0 && g.loss != 0.0) accumulate(out.grad, backprop_2d(placed, g.gradient), s2);
  }

  const double s3 = batch.scenes_3d.empty() ? 0.0 : weights.w_det3d / static_cast<double>(batch.scenes_3d.size());
  for (const Scene3D& sc : batch.scenes_3d) {
    const Image img = compose_scene3d(sc, patch);
    const auto g = detect::input_gradient(detector, img, make_loss(sc.gt, tau), shakedrop, shakedrop_rng);
    out.outcomes_3d.push_back({g.detections, sc.gt});
    if (s3 != 0.0 && g.loss != 0.0) accumulate(out.grad, backprop_scene3d(sc, patch, g.gradient), s3);
  }

  out.loss = total_loss(out.outcomes_2d, out.outcomes_3d, patch, weights, tau);
  if (weights.w_tv != 0.0 && !patch.data.empty()) {
    Image tv_grad;
    tv_loss(patch, &tv_grad);
    accumulate(out.grad, tv_grad, weights.w_tv / static_cast<double>(patch.data.size()));
  }
  return out;
}

RoundBatch draw_round(const TrainConfig& cfg, int round, const std::vector<PersonSample>& persons,
                      const std::vector<Image>& backgrounds, const GarmentRig& rig, const Image& patch) {
  RoundBatch batch;
  const auto r = static_cast<std::uint64_t>(round);
  if (cfg.batch_2d > 0) {
    if (persons.empty()) throw DomainError("2D branch needs at least one person image");
    Rng rng(derive_seed(cfg.seeds.transforms, r));
    for (int i = 0; i < cfg.batch_2d; ++i) {
      Item2D item;
      item.person = &persons[pick(rng, persons.size())];
      item.transform = sample_transform(cfg.transforms, item.person->box, rng);
      batch.items_2d.push_back(item);
    }
  }
  if (cfg.batch_3d > 0) {
    if (backgrounds.empty()) throw DomainError("3D branch needs at least one background");
    Rng rng(derive_seed(cfg.seeds.scene, r));
    for (int i = 0; i < cfg.batch_3d; ++i) {
      const Image& bg = backgrounds[pick(rng, backgrounds.size())];
      batch.scenes_3d.push_back(build_scene3d(bg, patch, rig, cfg.scene3d, rng));
    }
  }
  return batch;
}

TrainAborted::TrainAborted(int round_, Patch state_, const std::string& what)
    : std::runtime_error("round " + std::to_string(round_) + ": " + what), round(round_), state(std::move(state_)) {}

TrainResult train(const TrainConfig& cfg, const std::vector<PersonSample>& persons,
                  const std::vector<Image>& backgrounds, const detect::ToyDetector& detector, Patch initial,
                  const RoundCallback& on_round) {
  cfg.validate();
  TrainResult result;
  result.patch = std::move(initial);
  if (result.patch.texels.width != cfg.patch_size || result.patch.texels.height != cfg.patch_size) {
    throw DomainError("initial patch does not match patch_size");
  }
  const GarmentRig rig = GarmentRig::make(cfg.seeds.geometry, cfg.scene3d);
  const int first = static_cast<int>(result.patch.iteration);
  for (int round = first; round < cfg.rounds; ++round) {
    try {
      const RoundBatch batch = draw_round(cfg, round, persons, backgrounds, rig, result.patch.texels);
      Rng sd_rng(derive_seed(cfg.shakedrop.rng_seed, static_cast<std::uint64_t>(round)));
      const ObjectiveValue obj =
          evaluate_objective(batch, result.patch.texels, detector, cfg.weights, cfg.tau, cfg.shakedrop, sd_rng);
      patch_step(result.patch, obj.grad, cfg.mode, cfg.step);
      result.trace.push_back({round, obj.loss});
      if (on_round) on_round(result.trace.back(), result.patch);
    } catch (const TrainAborted&) {
      throw;
    } catch (const std::exception& e) {
      throw TrainAborted(round, result.patch, e.what());
    }
  }
  return result;
}

}  // namespace advreal::attack
