#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advreal/attack/train.hpp"
#include "advreal/harness/corpus.hpp"

namespace advreal::harness {

struct DetectorTrainingConfig {
  int max_steps = 3000;          // optimizer steps; the rate drops to 0.3x after 70% of them
  int batch = 4;
  double lr = 2e-3;
  double target_recall = 0.99;   // early stop once clean and noise-patch recall (IoU 0.5 / conf 0.5) both reach it
  double time_budget_s = 540.0;
  int eval_every = 250;
  int eval_scenes = 120;
  double augment_patch_prob = 0.6;
  double augment_dim_prob = 0.3;
  double negative_prob = 0.1;    // fraction of person-free samples
  double box_weight = 5.0;       // box regression weight in the detector loss
};

struct EvalConfig {
  std::string mode = "2d";   // 2d | 3d
  std::string split = "test";
  double iou = 0.5;
  double conf = 0.5;
  std::vector<double> iou_grid{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> conf_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> angles_deg{0, 45, 90, 135, 180, 225, 270, 315};
  int scenes_per_background = 1;  // 3D renders per background
};

struct RunConfig {
  std::string output_dir = "runs/default";
  std::string corpus_dir = "data/corpus";
  std::string detector_weights = "data/fixtures/toy_detector.weights";
  std::uint64_t detector_seed = 7;
  std::uint64_t eval_seed = 17;
  SyntheticCorpusSpec corpus;
  attack::TrainConfig attack;
  DetectorTrainingConfig detector_training;
  EvalConfig eval;
};

/// Full configuration tree with every default filled in.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

/// Merges `overrides` into the defaults. Unknown keys and type mismatches
/// are errors naming the key.
RunConfig config_from_json(const nlohmann::ordered_json& overrides);

/// FNV-1a 64 over the canonical dump, output_dir excluded. 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::ordered_json& tree, const std::string& assignment);

/// ADVREAL_A__B=value maps to a.b=value (double underscore separates levels).
std::vector<std::string> env_overrides(const std::map<std::string, std::string>& env);
std::map<std::string, std::string> current_environment();

/// Defaults <- config file <- environment <- explicit assignments.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::map<std::string, std::string>& env, const std::vector<std::string>& sets);

}  // namespace advreal::harness
