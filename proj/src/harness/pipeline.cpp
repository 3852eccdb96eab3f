#include "advreal/harness/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "advreal/attack/transform2d.hpp"
#include "advreal/core/errors.hpp"
#include "advreal/harness/artifacts.hpp"
#include "advreal/harness/image_io.hpp"

namespace advreal::harness {
namespace {

std::filesystem::path sidecar_of(const std::filesystem::path& png) {
  auto p = png;
  p.replace_extension(".json");
  return p;
}

// Random texture for augmentation: noise, smooth noise, stripes or a flat colour.
Image random_texture(Rng& rng, int size) {
  Image t(size, size, 3);
  const int kind = static_cast<int>(uniform(rng, 0, 4));
  if (kind == 0) {
    for (auto& v : t.data) v = uniform(rng, 0, 1);
  } else if (kind == 1) {
    const int cells = 2 + static_cast<int>(uniform(rng, 0, 6));
    Image g(cells, cells, 3);
    for (auto& v : g.data) v = uniform(rng, 0, 1);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        for (int c = 0; c < 3; ++c)
          t.at(x, y, c) = sample_bilinear(g, (x + 0.5) * cells / size - 0.5, (y + 0.5) * cells / size - 0.5, c);
  } else if (kind == 2) {
    const double a[3] = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    const double b[3] = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    const int period = 2 + static_cast<int>(uniform(rng, 0, size / 3.0));
    const bool vertical = bernoulli(rng, 0.5);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        for (int c = 0; c < 3; ++c) t.at(x, y, c) = (((vertical ? x : y) / period) % 2) ? a[c] : b[c];
  } else {
    const double a[3] = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        for (int c = 0; c < 3; ++c) t.at(x, y, c) = a[c];
  }
  return t;
}

}  // namespace

detect::ToyDetector load_detector(const RunConfig& cfg) { return detect::ToyDetector::load(cfg.detector_weights); }

metrics::DetectorFn detector_fn(const detect::ToyDetector& model) {
  return [&model](const Image& img) { return model.detect(img); };
}

std::vector<CorpusSample> load_split(const RunConfig& cfg, const std::string& split) {
  return ingest_corpus(cfg.corpus_dir, split == "all" ? "" : split);
}

std::vector<attack::PersonSample> to_persons(const std::vector<CorpusSample>& samples) {
  std::vector<attack::PersonSample> out;
  for (const auto& s : samples) {
    for (const auto& b : s.record.boxes) out.push_back({s.image, b});
  }
  return out;
}

std::vector<Image> backgrounds_of(const RunConfig& cfg, const std::vector<CorpusSample>& samples) {
  std::vector<CorpusRecord> recs;
  for (const auto& s : samples) recs.push_back(s.record);
  return load_backgrounds(cfg.corpus_dir, recs);
}

attack::Patch control_patch(const std::string& kind, const RunConfig& cfg) {
  const int n = cfg.attack.patch_size;
  if (kind == "noise") return attack::Patch::random_noise(n, n, cfg.attack.seeds.patch);
  if (kind == "gray") return attack::Patch::constant(n, n, 0.5);
  if (kind == "clean") return attack::Patch{};
  throw DomainError("unknown control '" + kind + "' (expected noise, gray or clean)");
}

void save_patch(const std::filesystem::path& png, const attack::Patch& patch, const RunConfig& cfg, bool overwrite) {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash(cfg);
  j["iteration"] = patch.iteration;
  j["rng_seed"] = patch.rng_seed;
  j["width"] = patch.texels.width;
  j["height"] = patch.texels.height;
  j["seeds"] = config_to_json(cfg)["seeds"];
  j["provenance"] = patch.provenance;
  check_target(sidecar_of(png), overwrite);
  write_png_artifact(png, patch.texels, overwrite);
  write_text_artifact(sidecar_of(png), j.dump(2) + "\n", overwrite);
}

attack::Patch load_patch(const std::filesystem::path& png) {
  attack::Patch p;
  p.texels = read_image(png);
  const auto side = sidecar_of(png);
  if (std::filesystem::exists(side)) {
    try {
      const auto j = nlohmann::json::parse(read_text(side));
      p.iteration = j.value("iteration", 0L);
      p.rng_seed = j.value("rng_seed", std::uint64_t{0});
      p.provenance = j.value("config_hash", std::string());
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("patch sidecar " + side.string() + ": " + e.what());
    }
  }
  return p;
}

std::string trace_csv(const std::vector<attack::TraceRow>& trace) {
  std::ostringstream o;
  o.precision(10);
  o << "round,L_det2d,L_det3d,L_tv,total\n";
  for (const auto& r : trace) {
    o << r.round << ',' << r.loss.det2d << ',' << r.loss.det3d << ',' << r.loss.tv << ',' << r.loss.total << '\n';
  }
  return o.str();
}

std::vector<metrics::SampleDetections> detections_2d(const Image& patch,
                                                     const std::vector<attack::PersonSample>& persons,
                                                     const detect::ToyDetector& model) {
  std::vector<metrics::SampleDetections> out;
  for (const auto& p : persons) {
    if (patch.empty()) {
      out.push_back({model.detect(p.image), {p.box}});
      continue;
    }
    const auto placed = attack::apply_2d(patch, p.image, p.box, attack::Transform2D{});
    out.push_back({model.detect(placed.image), {p.box}});
  }
  return out;
}

metrics::EvalReport eval_2d(const RunConfig&, const Image& patch, const std::vector<attack::PersonSample>& persons,
                            const detect::ToyDetector& model, const metrics::Thresholds& thr) {
  if (persons.empty()) throw DomainError("empty corpus");
  return metrics::evaluate_detections(detections_2d(patch, persons, model), thr);
}

std::vector<metrics::SampleDetections> detections_3d(const RunConfig& cfg, const Image& patch,
                                                     const std::vector<Image>& backgrounds,
                                                     const detect::ToyDetector& model,
                                                     std::optional<double> azimuth) {
  if (backgrounds.empty()) throw DomainError("no backgrounds for 3D evaluation");
  const auto rig = attack::GarmentRig::make(cfg.attack.seeds.geometry, cfg.attack.scene3d);
  std::vector<metrics::SampleDetections> out;
  for (std::size_t i = 0; i < backgrounds.size(); ++i) {
    for (int r = 0; r < cfg.eval.scenes_per_background; ++r) {
      Rng rng(derive_seed(cfg.eval_seed, i * 1000 + static_cast<std::size_t>(r)));
      const auto sc = attack::build_scene3d(backgrounds[i], patch, rig, cfg.attack.scene3d, rng, azimuth);
      out.push_back({model.detect(attack::compose_scene3d(sc, patch)), {sc.gt}});
    }
  }
  return out;
}

detect::DetectorSample make_detector_sample(const DetectorTrainingConfig& dt, Rng& rng, int image_size) {
  static constexpr BackgroundStyle kStyles[] = {BackgroundStyle::kGradient, BackgroundStyle::kNoise,
                                                BackgroundStyle::kTiled};
  const BackgroundStyle style = kStyles[static_cast<int>(uniform(rng, 0, 2.999))];
  detect::DetectorSample s;
  s.image = synth_background(style, image_size, rng);
  if (!bernoulli(rng, dt.negative_prob)) {
    scene::Camera cam;
    cam.width = cam.height = image_size;
    const bool textured = bernoulli(rng, 0.3);
    const Image tex = textured ? random_texture(rng, 32) : Image();
    const PersonScene ps = synth_person_scene(s.image, rng, cam, textured ? &tex : nullptr);
    s.image = ps.image;
    s.boxes = {ps.box};
    if (bernoulli(rng, dt.augment_patch_prob)) {
      const Image patch = random_texture(rng, 48);
      attack::TransformRanges ranges;
      ranges.scale_lo = 0.6;
      ranges.scale_hi = 1.4;
      ranges.offset_fraction = 0.15;
      const auto t = attack::sample_transform(ranges, ps.box, rng);
      s.image = attack::apply_2d(patch, s.image, ps.box, t).image;
    }
  }
  if (bernoulli(rng, dt.augment_dim_prob)) {
    const double m = uniform(rng, 0.3, 1.0);
    for (auto& v : s.image.data) v *= m;
  }
  return s;
}

double detector_recall(const detect::ToyDetector& model, const std::vector<detect::DetectorSample>& samples,
                       const Image* patch) {
  long hits = 0, total = 0;
  for (const auto& s : samples) {
    for (const auto& b : s.boxes) {
      const Image img = patch ? attack::apply_2d(*patch, s.image, b, attack::Transform2D{}).image : s.image;
      ++total;
      if (!metrics::attack_success(model.detect(img), b)) ++hits;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

DetectorTrainingResult train_detector(const RunConfig& cfg, const LogFn& log) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto& dt = cfg.detector_training;
  const int size = cfg.corpus.image_size;

  // Validation keeps the lighting variation but has no patches and no empty scenes.
  DetectorTrainingConfig clean = dt;
  clean.augment_patch_prob = 0.0;
  clean.negative_prob = 0.0;
  std::vector<detect::DetectorSample> val;
  Rng val_rng(derive_seed(cfg.detector_seed, 0xA11));
  for (int i = 0; i < dt.eval_scenes; ++i) val.push_back(make_detector_sample(clean, val_rng, size));
  const Image noise = attack::Patch::random_noise(cfg.attack.patch_size, cfg.attack.patch_size,
                                                  derive_seed(cfg.detector_seed, 0xB0B))
                          .texels;

  DetectorTrainingResult res;
  res.model.init(cfg.detector_seed);
  detect::DetectorAdam opt(res.model, dt.lr);
  detect::DetectorLossWeights lw;
  lw.box = dt.box_weight;
  Rng rng(derive_seed(cfg.detector_seed, 1));
  double best_score = -1.0;
  detect::ToyDetector best = res.model;
  for (int step = 1; step <= dt.max_steps; ++step) {
    auto grads = res.model.zero_gradients();
    double loss = 0.0;
    for (int b = 0; b < dt.batch; ++b) {
      loss += detect::detector_loss(res.model, make_detector_sample(dt, rng, size), lw, grads);
    }
    opt.set_lr(step > 0.7 * dt.max_steps ? 0.3 * dt.lr : dt.lr);
    opt.step(grads, 1.0 / dt.batch);
    const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
    const bool out_of_time = elapsed > dt.time_budget_s;
    if (step % dt.eval_every == 0 || step == dt.max_steps || out_of_time) {
      const double rc = detector_recall(res.model, val);
      const double rn = detector_recall(res.model, val, &noise);
      if (log) {
        std::ostringstream o;
        o << "step " << step << " loss " << loss / dt.batch << " clean_recall " << rc << " noise_recall " << rn
          << " elapsed " << elapsed << "s";
        log(o.str());
      }
      const double score = std::min(rc, rn);
      if (score > best_score) {
        best_score = score;
        best = res.model;
        res.clean_recall = rc;
        res.noise_recall = rn;
        res.steps = step;
      }
      if (score >= dt.target_recall) break;
    }
    if (out_of_time) break;
  }
  res.model = best;
  res.seconds = std::chrono::duration<double>(clock::now() - start).count();
  return res;
}

}  // namespace advreal::harness
