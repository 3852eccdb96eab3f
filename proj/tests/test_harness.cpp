#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "advreal/core/errors.hpp"
#include "advreal/harness/artifacts.hpp"
#include "advreal/harness/cli.hpp"
#include "advreal/harness/config.hpp"
#include "advreal/harness/corpus.hpp"
#include "advreal/harness/image_io.hpp"
#include "advreal/harness/pipeline.hpp"
#include "advreal/harness/plot.hpp"

using namespace advreal;
using namespace advreal::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kWeights = fs::path(ADVREAL_FIXTURE_DIR) / "toy_detector.weights";

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("advreal_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> with_paths(const Scratch& s, std::vector<std::string> args) {
  std::vector<std::string> base{"--set", "paths.corpus_dir=" + (s.dir / "corpus").string(),
                                "--set", "paths.output_dir=" + (s.dir / "out").string(),
                                "--set", "paths.detector_weights=" + kWeights.string()};
  base.insert(base.end(), args.begin(), args.end());
  return base;
}

std::string manifest_line(const CorpusRecord& r) {
  nlohmann::json j;
  j["image"] = r.image;
  j["boxes"] = nlohmann::json::array();
  for (const auto& b : r.boxes) j["boxes"].push_back({b.x_min, b.y_min, b.x_max, b.y_max});
  j["split"] = r.split;
  j["lighting"] = r.lighting;
  return j.dump();
}

}  // namespace

TEST_CASE("config defaults round-trip and hash") {
  const RunConfig d;
  const auto j = config_to_json(d);
  const RunConfig back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());
  CHECK(config_hash(back) == config_hash(d));
  CHECK(config_hash(d).size() == 16);

  RunConfig other = d;
  other.output_dir = "somewhere/else";
  CHECK(config_hash(other) == config_hash(d));
  other.attack.step = 0.02;
  CHECK(config_hash(other) != config_hash(d));
}

TEST_CASE("config documents every default") {
  const auto j = config_to_json(RunConfig{});
  CHECK(j["attack"]["rounds"] == 800);
  CHECK(j["attack"]["step"] == 0.01);
  CHECK(j["attack"]["patch_size"] == 300);
  CHECK(j["attack"]["batch_2d"] == 8);
  CHECK(j["attack"]["weights"]["tv"] == 2.5);
  CHECK(j["corpus"]["n_scenes"] == 562);
  CHECK(j["eval"]["iou"] == 0.5);
  CHECK(j["eval"]["conf"] == 0.5);
  for (const char* k : {"geometry", "scene", "shakedrop", "transforms"}) {
    CHECK((j.contains(k) || j["attack"].contains(k)));
  }
}

TEST_CASE("config merge is strict") {
  nlohmann::ordered_json bad = {{"attack", {{"roundz", 3}}}};
  try {
    config_from_json(bad);
    FAIL("expected error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("attack.roundz") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_json({{"attack", {{"rounds", "many"}}}}), DomainError);
  CHECK_THROWS_AS(config_from_json({{"attack", {{"rounds", 2.5}}}}), DomainError);
  CHECK_THROWS_AS(config_from_json({{"eval", {{"mode", "4d"}}}}), DomainError);
  CHECK(config_from_json({{"attack", {{"step", 1}}}}).attack.step == 1.0);  // int widens to real
}

TEST_CASE("config precedence: defaults < file < environment < assignments") {
  Scratch s("cfg");
  const auto file = s.dir / "run.json";
  std::ofstream(file) << R"({"attack": {"rounds": 10, "batch_2d": 3}, "eval": {"split": "all"}})";
  std::map<std::string, std::string> env{{"ADVREAL_ATTACK__ROUNDS", "20"},
                                         {"ADVREAL_SEEDS__PATCH", "99"},
                                         {"PATH", "/bin"}};
  const RunConfig c = resolve_config(file, env, {"attack.rounds=30", "paths.output_dir=xyz"});
  CHECK(c.attack.rounds == 30);
  CHECK(c.attack.batch_2d == 3);
  CHECK(c.attack.seeds.patch == 99);
  CHECK(c.eval.split == "all");
  CHECK(c.output_dir == "xyz");
  CHECK(c.attack.batch_3d == 8);

  const auto ov = env_overrides(env);
  CHECK(ov.size() == 2);
  CHECK_THROWS_AS(resolve_config(s.dir / "missing.json", {}, {}), IoError);
  CHECK_THROWS_AS(resolve_config(std::nullopt, {}, {"noequals"}), DomainError);
  CHECK_THROWS_AS(resolve_config(std::nullopt, {{"ADVREAL_NOPE", "1"}}, {}), DomainError);
}

TEST_CASE("single-scene corpus and manifest determinism") {
  Scratch s("corpus1");
  SyntheticCorpusSpec spec;
  spec.n_scenes = 1;
  const auto recs = generate_corpus(spec, s.dir / "a");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].boxes.size() == 1);
  int files = 0;
  for (const auto& e : fs::directory_iterator(s.dir / "a" / "images")) files += e.is_regular_file();
  CHECK(files == 1);

  spec.n_scenes = 6;
  generate_corpus(spec, s.dir / "b");
  generate_corpus(spec, s.dir / "c");
  CHECK(slurp(s.dir / "b" / kManifestName) == slurp(s.dir / "c" / kManifestName));
  CHECK(slurp(s.dir / "b" / "images" / "scene_0003.png") == slurp(s.dir / "c" / "images" / "scene_0003.png"));

  SyntheticCorpusSpec bad;
  bad.n_scenes = 0;
  CHECK_THROWS_AS(generate_corpus(bad, s.dir / "d"), DomainError);
  bad = SyntheticCorpusSpec{};
  bad.lighting_lo = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("default corpus mirrors the 450 adequate / 112 poor lighting split") {
  Scratch s("corpus562");
  const auto recs = generate_corpus(SyntheticCorpusSpec{}, s.dir);
  REQUIRE(recs.size() == 562);
  int poor = 0, test = 0;
  for (const auto& r : recs) {
    poor += r.lighting == "poor";
    test += r.split == "test";
    if (r.lighting == "poor") CHECK((r.multiplier >= 0.35 && r.multiplier <= 0.6));
    if (r.lighting == "adequate") CHECK(r.multiplier == 1.0);
  }
  CHECK(poor == 112);
  CHECK(562 - poor == 450);
  CHECK(test == 100);
}

TEST_CASE("ingestion round-trips a generated corpus") {
  Scratch s("ingest");
  SyntheticCorpusSpec spec;
  spec.n_scenes = 5;
  spec.test_fraction = 0.4;
  const auto recs = generate_corpus(spec, s.dir);
  const auto all = ingest_corpus(s.dir);
  REQUIRE(all.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(all[i].record.image == recs[i].image);
    CHECK(all[i].record.split == recs[i].split);
    CHECK(all[i].record.boxes.size() == recs[i].boxes.size());
    CHECK(all[i].record.boxes[0].x_min == recs[i].boxes[0].x_min);
    CHECK(all[i].image.width == spec.image_size);
    // Lossless: re-encoding what was read reproduces the stored PNG bytes.
    const auto again = s.dir / "again.png";
    write_png(again, all[i].image);
    CHECK(read_image(again).data == all[i].image.data);
  }
  const auto test = ingest_corpus(s.dir, "test");
  CHECK(test.size() == 2);
  CHECK(ingest_corpus(s.dir, "train").size() == 3);
}

TEST_CASE("ingestion rejects broken manifests with the offending record") {
  Scratch s("broken");
  SyntheticCorpusSpec spec;
  spec.n_scenes = 2;
  auto recs = generate_corpus(spec, s.dir);
  const auto manifest = s.dir / kManifestName;

  SUBCASE("missing file") {
    recs[1].image = "images/nope.png";
    std::ofstream(manifest) << manifest_line(recs[0]) << "\n" << manifest_line(recs[1]) << "\n";
    try {
      ingest_corpus(s.dir);
      FAIL("expected error");
    } catch (const IoError& e) {
      const std::string m = e.what();
      CHECK(m.find("record 2") != std::string::npos);
      CHECK(m.find("nope.png") != std::string::npos);
    }
  }
  SUBCASE("box out of bounds") {
    recs[0].boxes[0].x_max = 5000;
    std::ofstream(manifest) << manifest_line(recs[0]) << "\n" << manifest_line(recs[1]) << "\n";
    try {
      ingest_corpus(s.dir);
      FAIL("expected error");
    } catch (const DomainError& e) {
      const std::string m = e.what();
      CHECK(m.find("record 1") != std::string::npos);
      CHECK(m.find("box 0") != std::string::npos);
    }
  }
  SUBCASE("malformed record") {
    std::ofstream(manifest) << manifest_line(recs[0]) << "\n{\"image\": 3}\n";
    CHECK_THROWS_WITH_AS(ingest_corpus(s.dir), doctest::Contains("record 2"), DomainError);
  }
  SUBCASE("missing manifest") {
    fs::remove(manifest);
    CHECK_THROWS_AS(ingest_corpus(s.dir), IoError);
  }
}

TEST_CASE("output lock and atomic artifacts") {
  Scratch s("lock");
  {
    OutputLock a(s.dir / "out");
    CHECK(fs::exists(s.dir / "out" / kLockName));
    CHECK_THROWS_AS(OutputLock(s.dir / "out"), IoError);
  }
  CHECK_FALSE(fs::exists(s.dir / "out" / kLockName));
  OutputLock again(s.dir / "out");

  const auto f = s.dir / "out" / "x.txt";
  write_text_artifact(f, "one", false);
  CHECK(slurp(f) == "one");
  CHECK_FALSE(fs::exists(f.string() + kPartialSuffix));
  CHECK_THROWS_AS(write_text_artifact(f, "two", false), IoError);
  CHECK(slurp(f) == "one");
  write_text_artifact(f, "two", true);
  CHECK(slurp(f) == "two");
  CHECK_THROWS_AS(write_text_artifact(s.dir / "no" / "such" / "dir" / "f.txt", "x", false), IoError);
}

TEST_CASE("patch persistence with sidecar") {
  Scratch s("patch");
  RunConfig cfg;
  auto p = attack::Patch::random_noise(20, 16, 3);
  p.iteration = 7;
  save_patch(s.dir / "patch.png", p, cfg, false);
  const auto back = load_patch(s.dir / "patch.png");
  CHECK(back.iteration == 7);
  CHECK(back.provenance == config_hash(cfg));
  CHECK(back.texels.width == 20);
  CHECK(back.texels.data == quantize8(p.texels).data);
  const auto side = nlohmann::json::parse(slurp(s.dir / "patch.json"));
  CHECK(side["config_hash"] == config_hash(cfg));
  CHECK(side["seeds"]["patch"] == 1);
  CHECK_THROWS_AS(save_patch(s.dir / "patch.png", p, cfg, false), IoError);
}

TEST_CASE("plots are standalone SVG") {
  const std::string svg = line_plot_svg("t", "x", "y", {{"a", {0, 1, 2}, {0.1, 0.5, 0.2}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  const std::string polar = polar_plot_svg("p", {{"asr", {0, 90, 180, 270}, {0.1, 0.2, 0.3, 0.4}}});
  CHECK(polar.find("<polygon") != std::string::npos);
}

TEST_CASE("cli usage errors exit 2") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"eval", "--no-such-flag"}).code == kExitUsage);
  CHECK(cli({"eval", "--control", "purple"}).code == kExitUsage);
  const auto help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("gen-corpus") != std::string::npos);
}

TEST_CASE("cli module errors exit 1 with a structured message") {
  Scratch s("clierr");
  auto r = cli(with_paths(s, {"eval", "--control", "gray"}));
  CHECK(r.code == kExitModule);
  CHECK(r.err.rfind("error: {", 0) == 0);
  CHECK(r.err.find("\"kind\":\"io\"") != std::string::npos);
  CHECK_FALSE(fs::exists(s.dir / "out" / "eval_report.json"));
  CHECK_FALSE(fs::exists(s.dir / "out" / kLockName));

  r = cli(with_paths(s, {"--set", "attack.rounds=-1", "train"}));
  CHECK(r.code == kExitModule);
  r = cli(with_paths(s, {"--set", "bogus.key=1", "train"}));
  CHECK(r.code == kExitModule);
  CHECK(r.err.find("bogus") != std::string::npos);
}

TEST_CASE("cli dump-config reflects overrides") {
  const auto r = cli({"--set", "attack.rounds=5", "--dump-config", "train"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["attack"]["rounds"] == 5);
}

TEST_CASE("cli refuses to overwrite without the flag") {
  Scratch s("cliover");
  const auto base = with_paths(s, {"--set", "corpus.n_scenes=2"});
  auto args = base;
  args.push_back("gen-corpus");
  REQUIRE(cli(args).code == kExitOk);
  const auto r = cli(args);
  CHECK(r.code == kExitModule);
  CHECK(r.err.find("--overwrite") != std::string::npos);
  args.insert(args.begin(), "--overwrite");
  CHECK(cli(args).code == kExitOk);
}

TEST_CASE("cli pipeline on a small corpus") {
  REQUIRE_MESSAGE(fs::exists(kWeights), "detector fixture missing: " << kWeights);
  Scratch s("clipipe");
  const std::vector<std::string> small{"--set", "corpus.n_scenes=6", "--set", "corpus.test_fraction=0.5",
                                       "--set", "attack.patch_size=48", "--set", "attack.batch_2d=2",
                                       "--set", "attack.batch_3d=1"};
  auto run = [&](std::vector<std::string> extra) {
    auto a = with_paths(s, small);
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  REQUIRE(run({"gen-corpus"}).code == kExitOk);

  SUBCASE("zero training rounds leave the initial patch") {
    auto r = run({"--set", "attack.rounds=0", "train"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    CHECK(fs::exists(s.dir / "out" / "patch.png"));
    CHECK(fs::exists(s.dir / "out" / "patch.json"));
    CHECK(slurp(s.dir / "out" / "loss_trace.csv") == "round,L_det2d,L_det3d,L_tv,total\n");
    r = run({"--overwrite", "eval", "--patch", (s.dir / "out" / "patch.png").string()});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto trained = slurp(s.dir / "out" / "eval_report.json");
    r = run({"--overwrite", "eval", "--control", "noise"});
    REQUIRE(r.code == kExitOk);
    CHECK(slurp(s.dir / "out" / "eval_report.json") == trained);
  }
  SUBCASE("train, sweep, occlusion, angles and report") {
    auto r = run({"--set", "attack.rounds=2", "--set", "eval.split=all", "train"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto trace = read_csv(s.dir / "out" / "loss_trace.csv");
    CHECK(trace.rows.size() == 2);
    CHECK(trace.header == std::vector<std::string>{"round", "L_det2d", "L_det3d", "L_tv", "total"});
    const std::string patch = (s.dir / "out" / "patch.png").string();

    r = run({"sweep", "--patch", patch});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto table = read_csv(s.dir / "out" / "sweep_asr.csv");
    CHECK(table.header ==
          std::vector<std::string>{"conf_thres", "IoU=0.1", "IoU=0.3", "IoU=0.5", "IoU=0.7", "IoU=0.9"});
    CHECK(table.rows.size() == 9);
    CHECK(read_csv(s.dir / "out" / "sweep.csv").rows.size() == 45);

    r = run({"occlusion", "--patch", patch});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    CHECK(fs::exists(s.dir / "out" / "occlusion_report.json"));
    CHECK(fs::exists(s.dir / "out" / "unoccluded_report.json"));

    r = run({"--set", "eval.angles_deg=[0,90,180,270]", "eval", "--angles", "--patch", patch});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    CHECK(read_csv(s.dir / "out" / "angle_sweep.csv").rows.size() == 4);

    r = run({"--set", "eval.mode=3d", "eval", "--patch", patch});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto j = nlohmann::json::parse(slurp(s.dir / "out" / "eval_report.json"));
    CHECK(j["counts"]["total"] == 3);  // one render per test background

    r = run({"report"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    for (const char* f : {"loss_trace.svg", "sweep_asr.svg", "angle_sweep.svg"}) CHECK(fs::exists(s.dir / "out" / f));
  }
  SUBCASE("demos") {
    auto r = run({"deform-demo"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto v = read_csv(s.dir / "out" / "deform_vertices.csv");
    const int d = v.column("displacement"), c = v.column("cap");
    for (const auto& row : v.rows) CHECK(std::stod(row[d]) <= std::stod(row[c]) + 1e-9);
    r = run({"relight-demo", "--alpha", "1.2", "--beta", "0.05"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto j = nlohmann::json::parse(slurp(s.dir / "out" / "relight.json"));
    CHECK(std::abs(j["recovered"]["alpha"].get<double>() - 1.2) <= 0.1);
    CHECK(j["final_loss"].get<double>() <= j["initial_loss"].get<double>());
  }
}

TEST_CASE("fixture detector on the clean fixture corpus") {
  REQUIRE(fs::exists(kWeights));
  Scratch s("clean");
  RunConfig cfg = resolve_config(fs::path(ADVREAL_FIXTURE_DIR) / "fixture.json", {}, {});
  cfg.corpus_dir = (s.dir / "corpus").string();
  cfg.detector_weights = kWeights.string();
  generate_corpus(cfg.corpus, cfg.corpus_dir);
  const auto model = load_detector(cfg);
  const auto persons = to_persons(load_split(cfg, "all"));
  const metrics::Thresholds thr;
  const auto clean = eval_2d(cfg, Image(), persons, model, thr);
  const auto gray = eval_2d(cfg, control_patch("gray", cfg).texels, persons, model, thr);
  MESSAGE("clean ASR " << clean.asr << ", gray-patch ASR " << gray.asr);
  CHECK(clean.asr <= 0.05);
  CHECK(gray.asr <= 0.1);
}
