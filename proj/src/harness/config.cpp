#include "advreal/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "advreal/core/errors.hpp"

extern char** environ;

namespace advreal::harness {
namespace {

using nlohmann::ordered_json;

constexpr double kDeg = std::numbers::pi / 180.0;

bool same_kind(const ordered_json& a, const ordered_json& b) {
  if (a.is_number() && b.is_number()) {
    // unsigned seeds must stay integral
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

void merge_strict(ordered_json& base, const ordered_json& patch, const std::string& path) {
  if (!patch.is_object()) throw DomainError("config: '" + (path.empty() ? "<root>" : path) + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw DomainError("config: unknown key '" + key + "'");
    ordered_json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else {
      if (!same_kind(slot, it.value())) throw DomainError("config: wrong type for '" + key + "'");
      slot = it.value();
    }
  }
}

std::vector<double> doubles(const ordered_json& j) { return j.get<std::vector<double>>(); }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ordered_json config_to_json(const RunConfig& c) {
  const auto& a = c.attack;
  const auto& s3 = a.scene3d;
  ordered_json j;
  j["paths"] = {{"output_dir", c.output_dir}, {"corpus_dir", c.corpus_dir}, {"detector_weights", c.detector_weights}};
  j["seeds"] = {{"corpus", c.corpus.seed},        {"detector", c.detector_seed},  {"patch", a.seeds.patch},
                {"transforms", a.seeds.transforms}, {"geometry", a.seeds.geometry}, {"scene", a.seeds.scene},
                {"shakedrop", a.shakedrop.rng_seed}, {"eval", c.eval_seed}};
  j["corpus"] = {{"n_scenes", c.corpus.n_scenes},         {"style", to_string(c.corpus.style)},
                 {"poor_fraction", c.corpus.poor_fraction}, {"test_fraction", c.corpus.test_fraction},
                 {"lighting_lo", c.corpus.lighting_lo},     {"lighting_hi", c.corpus.lighting_hi},
                 {"image_size", c.corpus.image_size}};
  j["attack"] = {{"rounds", a.rounds},
                 {"batch_2d", a.batch_2d},
                 {"batch_3d", a.batch_3d},
                 {"patch_size", a.patch_size},
                 {"step", a.step},
                 {"mode", attack::to_string(a.mode)},
                 {"tau", a.tau},
                 {"weights", {{"det2d", a.weights.w_det2d}, {"det3d", a.weights.w_det3d}, {"tv", a.weights.w_tv}}},
                 {"transforms",
                  {{"max_rotation_deg", a.transforms.max_rotation / kDeg},
                   {"scale_lo", a.transforms.scale_lo},
                   {"scale_hi", a.transforms.scale_hi},
                   {"offset_fraction", a.transforms.offset_fraction},
                   {"occlusion_probability", a.transforms.occlusion_probability},
                   {"occlusion_fraction", a.transforms.occlusion_fraction},
                   {"max_noise", a.transforms.max_noise}}}};
  j["shakedrop"] = {{"enabled", a.shakedrop.enabled}, {"p_s", a.shakedrop.p_s}, {"k", a.shakedrop.k}};
  ordered_json cov = ordered_json::array();
  for (int r = 0; r < 3; ++r) cov.push_back({s3.tps.noise_covariance(r, 0), s3.tps.noise_covariance(r, 1),
                                            s3.tps.noise_covariance(r, 2)});
  j["geometry"] = {{"sigma_thres", s3.sigma_thres},
                   {"gamma", s3.selection.gamma},
                   {"rho", s3.selection.rho},
                   {"n_min", s3.selection.n_min},
                   {"kernel", s3.tps.kernel == geometry::RbfKernel::kLinear ? "linear" : "gaussian"},
                   {"kernel_width", s3.tps.kernel_width},
                   {"noise_scale", s3.tps.noise_scale},
                   {"noise_covariance", cov},
                   {"max_displacement", s3.tps.max_displacement},
                   {"stress_gain", s3.tps.stress_gain},
                   {"offset_max", s3.offset_max},
                   {"deform", s3.deform}};
  j["scene"] = {{"focal", s3.camera.focal},
                {"relight",
                 {{"enabled", s3.relight_enabled},
                  {"max_side", s3.relight_max_side},
                  {"alpha_lo", s3.relight.alpha_lo},
                  {"alpha_hi", s3.relight.alpha_hi},
                  {"beta_lo", s3.relight.beta_lo},
                  {"beta_hi", s3.relight.beta_hi},
                  {"lambda_alpha", s3.relight.lambda_alpha},
                  {"lambda_beta", s3.relight.lambda_beta},
                  {"lambda_theta", s3.relight.lambda_theta},
                  {"lr", s3.relight.lr},
                  {"iters", s3.relight.iters}}},
                {"timespace",
                 {{"aspect", s3.timespace.aspect},
                  {"aspect_jitter", s3.timespace.aspect_jitter},
                  {"fill", s3.timespace.fill},
                  {"min_step", s3.timespace.min_step},
                  {"max_step", s3.timespace.max_step}}}};
  const auto& d = c.detector_training;
  j["detector_training"] = {{"max_steps", d.max_steps},
                            {"batch", d.batch},
                            {"lr", d.lr},
                            {"target_recall", d.target_recall},
                            {"time_budget_s", d.time_budget_s},
                            {"eval_every", d.eval_every},
                            {"eval_scenes", d.eval_scenes},
                            {"augment_patch_prob", d.augment_patch_prob},
                            {"augment_dim_prob", d.augment_dim_prob},
                            {"negative_prob", d.negative_prob},
                            {"box_weight", d.box_weight}};
  j["eval"] = {{"mode", c.eval.mode},         {"split", c.eval.split},         {"iou", c.eval.iou},
               {"conf", c.eval.conf},         {"iou_grid", c.eval.iou_grid},   {"conf_grid", c.eval.conf_grid},
               {"angles_deg", c.eval.angles_deg}, {"scenes_per_background", c.eval.scenes_per_background}};
  return j;
}

RunConfig config_from_json(const ordered_json& overrides) {
  ordered_json j = config_to_json(RunConfig{});
  merge_strict(j, overrides, "");
  RunConfig c;
  try {
    c.output_dir = j["paths"]["output_dir"];
    c.corpus_dir = j["paths"]["corpus_dir"];
    c.detector_weights = j["paths"]["detector_weights"];
    const auto& sd = j["seeds"];
    c.corpus.seed = sd["corpus"];
    c.detector_seed = sd["detector"];
    c.eval_seed = sd["eval"];
    auto& a = c.attack;
    a.seeds.patch = sd["patch"];
    a.seeds.transforms = sd["transforms"];
    a.seeds.geometry = sd["geometry"];
    a.seeds.scene = sd["scene"];
    a.shakedrop.rng_seed = sd["shakedrop"];

    const auto& co = j["corpus"];
    c.corpus.n_scenes = co["n_scenes"];
    c.corpus.style = parse_background_style(co["style"]);
    c.corpus.poor_fraction = co["poor_fraction"];
    c.corpus.test_fraction = co["test_fraction"];
    c.corpus.lighting_lo = co["lighting_lo"];
    c.corpus.lighting_hi = co["lighting_hi"];
    c.corpus.image_size = co["image_size"];

    const auto& at = j["attack"];
    a.rounds = at["rounds"];
    a.batch_2d = at["batch_2d"];
    a.batch_3d = at["batch_3d"];
    a.patch_size = at["patch_size"];
    a.step = at["step"];
    a.mode = attack::parse_step_mode(at["mode"]);
    a.tau = at["tau"];
    a.weights.w_det2d = at["weights"]["det2d"];
    a.weights.w_det3d = at["weights"]["det3d"];
    a.weights.w_tv = at["weights"]["tv"];
    const auto& tr = at["transforms"];
    a.transforms.max_rotation = tr["max_rotation_deg"].get<double>() * kDeg;
    a.transforms.scale_lo = tr["scale_lo"];
    a.transforms.scale_hi = tr["scale_hi"];
    a.transforms.offset_fraction = tr["offset_fraction"];
    a.transforms.occlusion_probability = tr["occlusion_probability"];
    a.transforms.occlusion_fraction = tr["occlusion_fraction"];
    a.transforms.max_noise = tr["max_noise"];

    a.shakedrop.enabled = j["shakedrop"]["enabled"];
    a.shakedrop.p_s = j["shakedrop"]["p_s"];
    a.shakedrop.k = j["shakedrop"]["k"];

    auto& s3 = a.scene3d;
    const auto& g = j["geometry"];
    s3.sigma_thres = g["sigma_thres"];
    s3.selection.gamma = g["gamma"];
    s3.selection.rho = g["rho"];
    s3.selection.n_min = g["n_min"];
    const std::string kernel = g["kernel"];
    if (kernel == "linear") {
      s3.tps.kernel = geometry::RbfKernel::kLinear;
    } else if (kernel == "gaussian") {
      s3.tps.kernel = geometry::RbfKernel::kGaussian;
    } else {
      throw DomainError("config: geometry.kernel must be linear or gaussian");
    }
    s3.tps.kernel_width = g["kernel_width"];
    s3.tps.noise_scale = g["noise_scale"];
    const auto& cov = g["noise_covariance"];
    if (!cov.is_array() || cov.size() != 3) throw DomainError("config: geometry.noise_covariance must be 3x3");
    for (int r = 0; r < 3; ++r) {
      if (!cov[r].is_array() || cov[r].size() != 3) throw DomainError("config: geometry.noise_covariance must be 3x3");
      for (int k = 0; k < 3; ++k) s3.tps.noise_covariance(r, k) = cov[r][k].get<double>();
    }
    s3.tps.max_displacement = g["max_displacement"];
    s3.tps.stress_gain = g["stress_gain"];
    s3.offset_max = g["offset_max"];
    s3.deform = g["deform"];

    const auto& sc = j["scene"];
    s3.camera.focal = sc["focal"];
    const auto& rl = sc["relight"];
    s3.relight_enabled = rl["enabled"];
    s3.relight_max_side = rl["max_side"];
    s3.relight.alpha_lo = rl["alpha_lo"];
    s3.relight.alpha_hi = rl["alpha_hi"];
    s3.relight.beta_lo = rl["beta_lo"];
    s3.relight.beta_hi = rl["beta_hi"];
    s3.relight.lambda_alpha = rl["lambda_alpha"];
    s3.relight.lambda_beta = rl["lambda_beta"];
    s3.relight.lambda_theta = rl["lambda_theta"];
    s3.relight.lr = rl["lr"];
    s3.relight.iters = rl["iters"];
    const auto& ts = sc["timespace"];
    s3.timespace.aspect = ts["aspect"];
    s3.timespace.aspect_jitter = ts["aspect_jitter"];
    s3.timespace.fill = ts["fill"];
    s3.timespace.min_step = ts["min_step"];
    s3.timespace.max_step = ts["max_step"];
    s3.camera.width = s3.camera.height = c.corpus.image_size;

    const auto& dt = j["detector_training"];
    auto& d = c.detector_training;
    d.max_steps = dt["max_steps"];
    d.batch = dt["batch"];
    d.lr = dt["lr"];
    d.target_recall = dt["target_recall"];
    d.time_budget_s = dt["time_budget_s"];
    d.eval_every = dt["eval_every"];
    d.eval_scenes = dt["eval_scenes"];
    d.augment_patch_prob = dt["augment_patch_prob"];
    d.augment_dim_prob = dt["augment_dim_prob"];
    d.negative_prob = dt["negative_prob"];
    d.box_weight = dt["box_weight"];

    const auto& ev = j["eval"];
    c.eval.mode = ev["mode"];
    c.eval.split = ev["split"];
    c.eval.iou = ev["iou"];
    c.eval.conf = ev["conf"];
    c.eval.iou_grid = doubles(ev["iou_grid"]);
    c.eval.conf_grid = doubles(ev["conf_grid"]);
    c.eval.angles_deg = doubles(ev["angles_deg"]);
    c.eval.scenes_per_background = ev["scenes_per_background"];
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  if (c.eval.mode != "2d" && c.eval.mode != "3d") throw DomainError("config: eval.mode must be 2d or 3d");
  if (c.eval.split != "train" && c.eval.split != "test" && c.eval.split != "all") {
    throw DomainError("config: eval.split must be train, test or all");
  }
  if (c.eval.scenes_per_background < 1) throw DomainError("config: eval.scenes_per_background must be >= 1");
  if (c.detector_training.batch < 1 || c.detector_training.max_steps < 0 || c.detector_training.eval_every < 1 ||
      c.detector_training.eval_scenes < 1 || !(c.detector_training.box_weight >= 0.0)) {
    throw DomainError("config: invalid detector_training values");
  }
  c.corpus.validate();
  c.attack.validate();
  return c;
}

std::string config_hash(const RunConfig& cfg) {
  ordered_json j = config_to_json(cfg);
  j["paths"].erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

void apply_override(ordered_json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw DomainError("override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  ordered_json value;
  try {
    value = ordered_json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  ordered_json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw DomainError("override has an empty key segment: '" + key + "'");
    if (!node->is_object()) *node = ordered_json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::vector<std::string> env_overrides(const std::map<std::string, std::string>& env) {
  static const std::string prefix = "ADVREAL_";
  std::vector<std::string> out;
  for (const auto& [name, value] : env) {
    if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) continue;
    std::string key;
    const std::string rest = name.substr(prefix.size());
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == '_' && i + 1 < rest.size() && rest[i + 1] == '_') {
        key += '.';
        ++i;
      } else {
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(rest[i])));
      }
    }
    out.push_back(key + "=" + value);
  }
  return out;
}

std::map<std::string, std::string> current_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv = *e;
    const auto eq = kv.find('=');
    if (eq != std::string::npos) env[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return env;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::map<std::string, std::string>& env, const std::vector<std::string>& sets) {
  ordered_json overrides = ordered_json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot read config file " + file->string());
    try {
      overrides = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw DomainError("config file " + file->string() + ": " + e.what());
    }
  }
  for (const auto& s : env_overrides(env)) apply_override(overrides, s);
  for (const auto& s : sets) apply_override(overrides, s);
  return config_from_json(overrides);
}

}  // namespace advreal::harness
