#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "advreal/core/image.hpp"
#include "advreal/core/rng.hpp"
#include "advreal/scene/box.hpp"
#include "advreal/scene/camera.hpp"

namespace advreal::harness {

using scene::BoundingBox;

enum class BackgroundStyle { kGradient, kNoise, kTiled, kMixed };

BackgroundStyle parse_background_style(const std::string& name);
std::string to_string(BackgroundStyle s);

struct SyntheticCorpusSpec {
  int n_scenes = 562;
  BackgroundStyle style = BackgroundStyle::kMixed;  // mixed cycles gradient, noise, tiled
  std::uint64_t seed = 11;
  double poor_fraction = 112.0 / 562.0;
  double test_fraction = 100.0 / 562.0;
  double lighting_lo = 0.35;  // luminance multiplier range of poor-lighting scenes
  double lighting_hi = 0.6;
  int image_size = 416;

  void validate() const;
};

/// Background-only image of the given style.
Image synth_background(BackgroundStyle style, int size, Rng& rng);

struct PersonScene {
  Image image;
  BoundingBox box;  // tight silhouette box
  double distance = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  double scale = 0.0;
};

/// Renders one untextured person with random clothing colours at a
/// time-space sampled placement and composites it onto `background`.
/// `garment_texture` replaces the solid garment colour when given.
PersonScene synth_person_scene(const Image& background, Rng& rng, const scene::Camera& camera = {},
                               const Image* garment_texture = nullptr);

struct CorpusRecord {
  std::string image;  // relative to the corpus directory
  std::vector<BoundingBox> boxes;
  std::string split;     // train | test
  std::string lighting;  // adequate | poor
  double multiplier = 1.0;
  std::string background;  // optional person-free background, relative path
  std::string render_json;  // optional render parameters as compact JSON
};

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Writes images/, backgrounds/ and manifest.jsonl under `dir`. Deterministic in the spec.
std::vector<CorpusRecord> generate_corpus(const SyntheticCorpusSpec& spec, const std::filesystem::path& dir);

/// Parses and validates the manifest: every referenced file exists and every
/// box lies inside its image. Errors name the record.
std::vector<CorpusRecord> read_manifest(const std::filesystem::path& dir);

struct CorpusSample {
  CorpusRecord record;
  Image image;
};

/// Loads images (and validates boxes against them) in manifest order,
/// optionally restricted to one split.
std::vector<CorpusSample> ingest_corpus(const std::filesystem::path& dir, const std::string& split = "");

std::vector<Image> load_backgrounds(const std::filesystem::path& dir, const std::vector<CorpusRecord>& records);

}  // namespace advreal::harness
