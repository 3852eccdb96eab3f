#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advreal/attack/patch.hpp"
#include "advreal/attack/train.hpp"
#include "advreal/detect/toy_detector.hpp"
#include "advreal/detect/training.hpp"
#include "advreal/harness/config.hpp"
#include "advreal/harness/corpus.hpp"
#include "advreal/metrics/metrics.hpp"

namespace advreal::harness {

using LogFn = std::function<void(const std::string&)>;

detect::ToyDetector load_detector(const RunConfig& cfg);
metrics::DetectorFn detector_fn(const detect::ToyDetector& model);

/// Split "all" loads every record.
std::vector<CorpusSample> load_split(const RunConfig& cfg, const std::string& split);
std::vector<attack::PersonSample> to_persons(const std::vector<CorpusSample>& samples);
std::vector<Image> backgrounds_of(const RunConfig& cfg, const std::vector<CorpusSample>& samples);

/// Control patches: "noise" (seeded uniform noise, also the training
/// initialisation), "gray" (constant 0.5) or "clean" (empty, nothing placed).
attack::Patch control_patch(const std::string& kind, const RunConfig& cfg);

/// patch.png plus patch.json (config hash, seeds, iteration).
void save_patch(const std::filesystem::path& png, const attack::Patch& patch, const RunConfig& cfg, bool overwrite);
/// Loads a patch PNG and, when present, its JSON sidecar metadata.
attack::Patch load_patch(const std::filesystem::path& png);

std::string trace_csv(const std::vector<attack::TraceRow>& trace);

metrics::EvalReport eval_2d(const RunConfig& cfg, const Image& patch, const std::vector<attack::PersonSample>& persons,
                            const detect::ToyDetector& model, const metrics::Thresholds& thr);

/// Renders the patch-wearing person onto each background (seeded by eval seed) and detects.
std::vector<metrics::SampleDetections> detections_3d(const RunConfig& cfg, const Image& patch,
                                                     const std::vector<Image>& backgrounds,
                                                     const detect::ToyDetector& model,
                                                     std::optional<double> azimuth = std::nullopt);
/// An empty patch leaves the images untouched.
std::vector<metrics::SampleDetections> detections_2d(const Image& patch,
                                                     const std::vector<attack::PersonSample>& persons,
                                                     const detect::ToyDetector& model);

/// One randomly generated detector training sample (with augmentation).
detect::DetectorSample make_detector_sample(const DetectorTrainingConfig& dt, Rng& rng, int image_size);

struct DetectorTrainingResult {
  detect::ToyDetector model;
  int steps = 0;
  double clean_recall = 0.0;
  double noise_recall = 0.0;
  double seconds = 0.0;
};

/// Trains the fixture detector until both validation recalls reach the target or the budget runs out.
DetectorTrainingResult train_detector(const RunConfig& cfg, const LogFn& log = {});

/// Recall at IoU 0.5 / conf 0.5 over samples, with an optional noise patch on every person.
double detector_recall(const detect::ToyDetector& model, const std::vector<detect::DetectorSample>& samples,
                       const Image* patch = nullptr);

}  // namespace advreal::harness
