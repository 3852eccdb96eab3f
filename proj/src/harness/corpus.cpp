#include "advreal/harness/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "advreal/core/errors.hpp"
#include "advreal/geometry/humanoid.hpp"
#include "advreal/harness/image_io.hpp"
#include "advreal/scene/composite.hpp"
#include "advreal/scene/rasterizer.hpp"
#include "advreal/scene/timespace.hpp"

namespace advreal::harness {
namespace {

using nlohmann::ordered_json;
using Rgb = std::array<double, 3>;

Rgb random_color(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

void gradient_fill(Image& img, Rng& rng) {
  const Rgb a = random_color(rng), b = random_color(rng);
  const double ang = uniform(rng, 0.0, 2.0 * 3.141592653589793);
  const double dx = std::cos(ang), dy = std::sin(ang);
  const double n = img.width;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double t = std::clamp(0.5 + ((x - 0.5 * n) * dx + (y - 0.5 * n) * dy) / n, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = (1.0 - t) * a[c] + t * b[c];
    }
  }
}

void value_noise_fill(Image& img, Rng& rng) {
  const int cells = 4 + static_cast<int>(uniform(rng, 0, 8));
  Image grid(cells + 1, cells + 1, 3);
  for (auto& v : grid.data) v = uniform(rng, 0.1, 0.9);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double gx = static_cast<double>(x) / img.width * cells;
      const double gy = static_cast<double>(y) / img.height * cells;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = sample_bilinear(grid, gx, gy, c);
    }
  }
  const double grain = uniform(rng, 0.0, 0.05);
  for (auto& v : img.data) v = std::clamp(v + grain * normal(rng), 0.0, 1.0);
}

void tiled_fill(Image& img, Rng& rng) {
  const int tile = 16 + static_cast<int>(uniform(rng, 0, 48));
  const Rgb a = random_color(rng), b = random_color(rng);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const bool odd = ((x / tile) + (y / tile)) % 2 != 0;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = odd ? a[c] : b[c];
    }
  }
}

// A few solid rectangles so backgrounds are not featureless.
void add_distractors(Image& img, Rng& rng) {
  const int n = static_cast<int>(uniform(rng, 0, 4));
  for (int k = 0; k < n; ++k) {
    const Rgb col = random_color(rng);
    const int w = static_cast<int>(uniform(rng, 10, 0.4 * img.width));
    const int h = static_cast<int>(uniform(rng, 10, 0.4 * img.height));
    const int x0 = static_cast<int>(uniform(rng, 0, img.width - w));
    const int y0 = static_cast<int>(uniform(rng, 0, img.height - h));
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x)
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = col[c];
  }
}

std::string scene_name(int i) {
  std::ostringstream s;
  s << "scene_" << std::setw(4) << std::setfill('0') << i << ".png";
  return s.str();
}

ordered_json record_to_json(const CorpusRecord& r) {
  ordered_json j;
  j["image"] = r.image;
  ordered_json boxes = ordered_json::array();
  for (const auto& b : r.boxes) boxes.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
  j["boxes"] = boxes;
  j["split"] = r.split;
  j["lighting"] = r.lighting;
  j["multiplier"] = r.multiplier;
  if (!r.background.empty()) j["background"] = r.background;
  if (!r.render_json.empty()) j["render"] = ordered_json::parse(r.render_json);
  return j;
}

CorpusRecord record_from_json(const ordered_json& j, std::size_t line) {
  const std::string where = "manifest record " + std::to_string(line);
  if (!j.is_object()) throw DomainError(where + ": not a JSON object");
  CorpusRecord r;
  try {
    r.image = j.at("image").get<std::string>();
    for (const auto& b : j.at("boxes")) {
      if (!b.is_array() || b.size() != 4) throw DomainError(where + ": box must have 4 numbers");
      r.boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()});
    }
    r.split = j.value("split", "train");
    r.lighting = j.value("lighting", "adequate");
    r.multiplier = j.value("multiplier", 1.0);
    r.background = j.value("background", "");
    if (j.contains("render")) r.render_json = j.at("render").dump();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(where + ": " + e.what());
  }
  if (r.split != "train" && r.split != "test") throw DomainError(where + ": unknown split '" + r.split + "'");
  if (r.boxes.empty()) throw DomainError(where + ": no boxes");
  return r;
}

}  // namespace

BackgroundStyle parse_background_style(const std::string& name) {
  if (name == "gradient") return BackgroundStyle::kGradient;
  if (name == "noise") return BackgroundStyle::kNoise;
  if (name == "tiled") return BackgroundStyle::kTiled;
  if (name == "mixed") return BackgroundStyle::kMixed;
  throw DomainError("unknown background style '" + name + "'");
}

std::string to_string(BackgroundStyle s) {
  switch (s) {
    case BackgroundStyle::kGradient: return "gradient";
    case BackgroundStyle::kNoise: return "noise";
    case BackgroundStyle::kTiled: return "tiled";
    case BackgroundStyle::kMixed: return "mixed";
  }
  return "mixed";
}

void SyntheticCorpusSpec::validate() const {
  if (n_scenes < 1) throw DomainError("n_scenes must be at least 1");
  if (!(lighting_lo > 0.0 && lighting_lo <= lighting_hi)) throw DomainError("lighting multipliers must be positive");
  if (!(poor_fraction >= 0.0 && poor_fraction <= 1.0)) throw DomainError("poor_fraction outside [0,1]");
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw DomainError("test_fraction outside [0,1]");
  if (image_size < 64) throw DomainError("image_size too small");
}

Image synth_background(BackgroundStyle style, int size, Rng& rng) {
  Image img(size, size, 3);
  switch (style) {
    case BackgroundStyle::kGradient: gradient_fill(img, rng); break;
    case BackgroundStyle::kNoise: value_noise_fill(img, rng); break;
    case BackgroundStyle::kTiled: tiled_fill(img, rng); break;
    case BackgroundStyle::kMixed: throw DomainError("mixed is not a concrete background style");
  }
  add_distractors(img, rng);
  return img;
}

PersonScene synth_person_scene(const Image& background, Rng& rng, const scene::Camera& camera,
                               const Image* garment_texture) {
  static const geometry::BodyMesh body = geometry::make_body();
  Rng garment_rng(rng());
  const geometry::GarmentMesh garment = geometry::make_garment_panel({}, garment_rng);
  scene::BodyColors colors;
  const double tone = uniform(rng, 0.3, 0.95);
  colors.skin = {tone, tone * uniform(rng, 0.7, 0.85), tone * uniform(rng, 0.55, 0.75)};
  colors.shirt = random_color(rng);
  colors.pants = random_color(rng, 0.05, 0.7);
  Image texture(4, 4, 3);
  const Rgb garment_col = bernoulli(rng, 0.5) ? colors.shirt : random_color(rng);
  for (int i = 0; i < 16; ++i)
    for (int c = 0; c < 3; ++c) texture.data[i * 3 + c] = garment_col[c];

  const auto place = scene::timespace_sample(camera, rng);
  const auto params = scene::derive_render_params(place.human, place.orientation, camera);
  const auto out =
      scene::rasterize(body, garment, garment_texture ? *garment_texture : texture, params, place.human, camera, colors);
  PersonScene ps;
  ps.image = scene::composite(out.render, out.mask, background);
  ps.box = out.silhouette_box;
  ps.distance = params.distance;
  ps.azimuth = params.azimuth;
  ps.elevation = params.elevation;
  ps.scale = params.scale;
  return ps;
}

std::vector<CorpusRecord> generate_corpus(const SyntheticCorpusSpec& spec, const std::filesystem::path& dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  std::filesystem::create_directories(dir / "backgrounds", ec);
  if (ec || !std::filesystem::is_directory(dir / "images")) throw IoError("cannot create corpus directory " + dir.string());

  const int n = spec.n_scenes;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(spec.seed, 0));
  std::shuffle(order.begin(), order.end(), split_rng);
  const int n_poor = static_cast<int>(std::lround(spec.poor_fraction * n));
  std::vector<bool> poor(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n_poor; ++i) poor[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  std::shuffle(order.begin(), order.end(), split_rng);
  const int n_test = static_cast<int>(std::lround(spec.test_fraction * n));
  std::vector<bool> test(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n_test; ++i) test[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  scene::Camera camera;
  camera.width = camera.height = spec.image_size;
  static constexpr BackgroundStyle kCycle[] = {BackgroundStyle::kGradient, BackgroundStyle::kNoise,
                                               BackgroundStyle::kTiled};
  std::vector<CorpusRecord> records;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i) + 1));
    const BackgroundStyle style = spec.style == BackgroundStyle::kMixed ? kCycle[i % 3] : spec.style;
    Image bg = synth_background(style, spec.image_size, rng);
    PersonScene ps = synth_person_scene(bg, rng, camera);
    CorpusRecord r;
    r.multiplier = poor[static_cast<std::size_t>(i)] ? uniform(rng, spec.lighting_lo, spec.lighting_hi) : 1.0;
    if (r.multiplier != 1.0) {
      for (auto& v : ps.image.data) v *= r.multiplier;
      for (auto& v : bg.data) v *= r.multiplier;
    }
    r.image = "images/" + scene_name(i);
    r.background = "backgrounds/" + scene_name(i);
    r.boxes = {ps.box};
    r.split = test[static_cast<std::size_t>(i)] ? "test" : "train";
    r.lighting = poor[static_cast<std::size_t>(i)] ? "poor" : "adequate";
    ordered_json render;
    render["distance"] = ps.distance;
    render["azimuth"] = ps.azimuth;
    render["elevation"] = ps.elevation;
    render["scale"] = ps.scale;
    render["style"] = to_string(style);
    r.render_json = render.dump();
    write_png(dir / r.image, ps.image);
    write_png(dir / r.background, bg);
    records.push_back(std::move(r));
  }
  const auto manifest = dir / kManifestName;
  const auto tmp = dir / (std::string(kManifestName) + ".partial");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, manifest);
  return records;
}

std::vector<CorpusRecord> read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("missing manifest: " + path.string());
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DomainError("manifest record " + std::to_string(lineno) + ": " + e.what());
    }
    CorpusRecord r = record_from_json(j, lineno);
    if (!std::filesystem::exists(dir / r.image)) {
      throw IoError("manifest record " + std::to_string(lineno) + ": missing file " + (dir / r.image).string());
    }
    if (!r.background.empty() && !std::filesystem::exists(dir / r.background)) {
      throw IoError("manifest record " + std::to_string(lineno) + ": missing file " + (dir / r.background).string());
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw DomainError("manifest has no records: " + path.string());
  return out;
}

std::vector<CorpusSample> ingest_corpus(const std::filesystem::path& dir, const std::string& split) {
  const auto records = read_manifest(dir);
  std::vector<CorpusSample> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!split.empty() && records[i].split != split) continue;
    CorpusSample s{records[i], read_image(dir / records[i].image)};
    for (std::size_t b = 0; b < s.record.boxes.size(); ++b) {
      const auto& box = s.record.boxes[b];
      if (!box.valid() || !box.inside(s.image.width, s.image.height)) {
        throw DomainError("manifest record " + std::to_string(i + 1) + ": box " + std::to_string(b) +
                          " outside image bounds");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Image> load_backgrounds(const std::filesystem::path& dir, const std::vector<CorpusRecord>& records) {
  std::vector<Image> out;
  for (const auto& r : records) {
    if (!r.background.empty()) out.push_back(read_image(dir / r.background));
  }
  return out;
}

}  // namespace advreal::harness
