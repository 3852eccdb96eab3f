#include "advreal/harness/cli.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "advreal/core/errors.hpp"
#include "advreal/core/log.hpp"
#include "advreal/geometry/obj_io.hpp"
#include "advreal/harness/artifacts.hpp"
#include "advreal/harness/config.hpp"
#include "advreal/harness/corpus.hpp"
#include "advreal/harness/image_io.hpp"
#include "advreal/harness/pipeline.hpp"
#include "advreal/harness/plot.hpp"
#include "advreal/metrics/metrics.hpp"

namespace advreal::harness {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  bool overwrite = false;
  bool dump_config = false;
};

RunConfig resolve(const Common& c) {
  std::optional<fs::path> file;
  if (!c.config_file.empty()) file = c.config_file;
  return resolve_config(file, current_environment(), c.sets);
}

std::string report_csv(const metrics::EvalReport& r) {
  std::ostringstream o;
  metrics::write_report_csv(o, r);
  return o.str();
}

void write_report(const fs::path& dir, const std::string& stem, const metrics::EvalReport& r, bool overwrite) {
  check_target(dir / (stem + ".csv"), overwrite);
  write_text_artifact(dir / (stem + ".json"), metrics::report_to_json(r), overwrite);
  write_text_artifact(dir / (stem + ".csv"), report_csv(r), overwrite);
}

attack::Patch pick_patch(const std::string& patch_path, const std::string& control, const RunConfig& cfg) {
  if (!patch_path.empty() && !control.empty()) throw DomainError("--patch and --control are exclusive");
  if (!patch_path.empty()) return load_patch(patch_path);
  return control_patch(control.empty() ? "noise" : control, cfg);
}

metrics::Thresholds thresholds_of(const RunConfig& cfg) {
  metrics::Thresholds t;
  t.iou = cfg.eval.iou;
  t.conf = cfg.eval.conf;
  return t;
}

std::vector<metrics::SampleDetections> eval_detections(const RunConfig& cfg, const Image& patch,
                                                       const detect::ToyDetector& model) {
  const auto samples = load_split(cfg, cfg.eval.split);
  if (cfg.eval.mode == "2d") return detections_2d(patch, to_persons(samples), model);
  if (cfg.eval.mode == "3d") return detections_3d(cfg, patch, backgrounds_of(cfg, samples), model);
  throw DomainError("eval.mode must be 2d or 3d, got '" + cfg.eval.mode + "'");
}

int cmd_gen_corpus(const RunConfig& cfg, const Common& c, std::ostream& out) {
  const fs::path dir = cfg.corpus_dir;
  OutputLock lock(dir);
  check_target(dir / kManifestName, c.overwrite);
  const auto recs = generate_corpus(cfg.corpus, dir);
  out << "wrote " << recs.size() << " scenes to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_train_detector(const RunConfig& cfg, const Common& c, std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  check_target(cfg.detector_weights, c.overwrite);
  std::ostringstream logtxt;
  const auto res = train_detector(cfg, [&](const std::string& line) {
    out << line << "\n" << std::flush;
    logtxt << line << "\n";
  });
  if (const auto parent = fs::path(cfg.detector_weights).parent_path(); !parent.empty()) fs::create_directories(parent);
  const fs::path tmp = cfg.detector_weights + kPartialSuffix;
  res.model.save(tmp);
  fs::rename(tmp, cfg.detector_weights);
  nlohmann::ordered_json j;
  j["steps"] = res.steps;
  j["clean_recall"] = res.clean_recall;
  j["noise_recall"] = res.noise_recall;
  j["seconds"] = res.seconds;
  j["config_hash"] = config_hash(cfg);
  write_text_artifact(od / "detector_training.json", j.dump(2) + "\n", c.overwrite);
  write_text_artifact(od / "detector_training.log", logtxt.str(), c.overwrite);
  out << "clean recall " << res.clean_recall << ", noise-patch recall " << res.noise_recall << " after "
      << res.steps << " steps\n";
  if (res.clean_recall < 0.95) warn("fixture detector clean recall is below 0.95");
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, const Common& c, const std::string& split, const std::string& resume,
              int log_every, std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  for (const char* f : {"patch.png", "patch.json", "loss_trace.csv"}) check_target(od / f, c.overwrite);
  const auto samples = load_split(cfg, split);
  const auto persons = to_persons(samples);
  const auto bgs = backgrounds_of(cfg, samples);
  const auto model = load_detector(cfg);
  attack::Patch init = resume.empty() ? control_patch("noise", cfg) : load_patch(resume);
  std::vector<attack::TraceRow> rows;
  try {
    const auto res = attack::train(cfg.attack, persons, bgs, model, init, [&](const attack::TraceRow& r, const attack::Patch&) {
      rows.push_back(r);
      if (log_every > 0 && (r.round % log_every == 0)) {
        out << "round " << r.round << " det2d " << r.loss.det2d << " det3d " << r.loss.det3d << " tv "
            << r.loss.tv << " total " << r.loss.total << "\n" << std::flush;
      }
    });
    save_patch(od / "patch.png", res.patch, cfg, c.overwrite);
    write_text_artifact(od / "loss_trace.csv", trace_csv(res.trace), c.overwrite);
  } catch (const attack::TrainAborted& e) {
    // State reached so far, marked partial.
    write_png(od / (std::string("patch.png") + kPartialSuffix), e.state.texels);
    std::ofstream(od / (std::string("loss_trace.csv") + kPartialSuffix)) << trace_csv(rows);
    throw;
  }
  out << "trained " << cfg.attack.rounds << " rounds; patch written to " << (od / "patch.png").string() << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const Common& c, const std::string& patch_path, const std::string& control,
             bool angles, std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  const auto patch = pick_patch(patch_path, control, cfg);
  const auto model = load_detector(cfg);
  const auto thr = thresholds_of(cfg);
  if (angles) {
    const auto samples = load_split(cfg, cfg.eval.split);
    const auto bgs = backgrounds_of(cfg, samples);
    std::ostringstream csv;
    csv << "angle_deg,asr,recall,avg_confidence,total\n";
    for (double a : cfg.eval.angles_deg) {
      const auto rep = metrics::evaluate_detections(
          detections_3d(cfg, patch.texels, bgs, model, a * std::numbers::pi / 180.0), thr);
      csv << a << ',' << rep.asr << ',' << rep.recall << ',' << rep.avg_confidence << ',' << rep.counts.total
          << '\n';
      out << "azimuth " << a << " asr " << rep.asr << "\n";
    }
    write_text_artifact(od / "angle_sweep.csv", csv.str(), c.overwrite);
    return kExitOk;
  }
  const auto rep = metrics::evaluate_detections(eval_detections(cfg, patch.texels, model), thr);
  write_report(od, "eval_report", rep, c.overwrite);
  out << metrics::report_to_json(rep) << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const Common& c, const std::string& patch_path, const std::string& control,
              std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  check_target(od / "sweep_asr.csv", c.overwrite);
  const auto patch = pick_patch(patch_path, control, cfg);
  const auto model = load_detector(cfg);
  const auto cells = metrics::sweep(eval_detections(cfg, patch.texels, model), cfg.eval.iou_grid, cfg.eval.conf_grid);
  std::ostringstream lng, table;
  metrics::write_sweep_csv(lng, cells);
  metrics::write_sweep_asr_table(table, cells);
  write_text_artifact(od / "sweep.csv", lng.str(), c.overwrite);
  write_text_artifact(od / "sweep_asr.csv", table.str(), c.overwrite);
  out << table.str();
  return kExitOk;
}

int cmd_occlusion(const RunConfig& cfg, const Common& c, const std::string& patch_path, const std::string& control,
                  std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  for (const char* f : {"occlusion_report.csv", "unoccluded_report.json", "unoccluded_report.csv"}) {
    check_target(od / f, c.overwrite);
  }
  const auto patch = pick_patch(patch_path, control, cfg);
  const auto model = load_detector(cfg);
  const auto persons = to_persons(load_split(cfg, cfg.eval.split));
  const auto fn = detector_fn(model);
  const auto thr = thresholds_of(cfg);
  const auto base = metrics::evaluate_patch_2d(patch.texels, persons, fn, thr);
  const auto occ = metrics::occlusion_protocol(patch.texels, persons, fn, thr);
  write_report(od, "unoccluded_report", base, c.overwrite);
  write_report(od, "occlusion_report", occ.report, c.overwrite);
  out << "unoccluded asr " << base.asr << ", occluded asr " << occ.report.asr << " (square " << occ.square_width
      << "x" << occ.square_height << ")\n";
  return kExitOk;
}

int cmd_deform_demo(const RunConfig& cfg, const Common& c, std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  const auto& s3 = cfg.attack.scene3d;
  const auto rig = attack::GarmentRig::make(cfg.attack.seeds.geometry, s3);
  Rng rng(derive_seed(cfg.attack.seeds.geometry, 0xDEF));
  auto control = rig.control;
  geometry::sample_target_offsets(control, s3.offset_max, rng);
  auto tps = s3.tps;
  tps.rng_seed = rng();
  const auto deformed = geometry::deform(rig.garment, control, rig.stress, tps);

  std::ostringstream before, after, csv;
  geometry::write_obj(before, rig.garment);
  geometry::write_obj(after, deformed);
  csv.precision(10);
  csv << "vertex,stress,control,displacement,cap\n";
  std::vector<bool> is_control(rig.garment.vertices.size(), false);
  for (int i : control.indices) is_control[static_cast<std::size_t>(i)] = true;
  double worst = -1e300;
  for (std::size_t i = 0; i < rig.garment.vertices.size(); ++i) {
    const double d = (deformed.vertices[i] - rig.garment.vertices[i]).norm();
    const double cap = tps.max_displacement * (1.0 + tps.stress_gain * rig.stress.sigma[i]);
    worst = std::max(worst, d - cap);
    csv << i << ',' << rig.stress.sigma[i] << ',' << (is_control[i] ? 1 : 0) << ',' << d << ',' << cap << '\n';
  }
  write_text_artifact(od / "garment.obj", before.str(), c.overwrite);
  write_text_artifact(od / "garment_deformed.obj", after.str(), c.overwrite);
  write_text_artifact(od / "deform_vertices.csv", csv.str(), c.overwrite);
  out << rig.garment.vertices.size() << " vertices, " << control.size() << " control points, max(displacement - cap) "
      << worst << "\n";
  return kExitOk;
}

int cmd_relight_demo(const RunConfig& cfg, const Common& c, double alpha, double beta, std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  auto s3 = cfg.attack.scene3d;
  s3.relight_enabled = false;
  const auto rig = attack::GarmentRig::make(cfg.attack.seeds.geometry, s3);
  Rng rng(derive_seed(cfg.attack.seeds.scene, 0x11F));
  const Image bg(s3.camera.width, s3.camera.height, 3, 0.0);
  const auto patch = control_patch("noise", cfg);
  const auto sc = attack::build_scene3d(bg, patch.texels, rig, s3, rng);
  scene::RelightCoefficients truth;
  truth.alpha = alpha;
  truth.beta = beta;
  const Image real = scene::apply_relight(sc.render.render, truth, &sc.render.mask, &sc.render.render);
  const auto res = scene::relight_optimize(sc.render.render, real, s3.relight, &sc.render.mask);
  nlohmann::ordered_json j;
  j["target"] = {{"alpha", alpha}, {"beta", beta}};
  j["recovered"] = {{"alpha", res.coeffs.alpha}, {"beta", res.coeffs.beta}};
  j["initial_loss"] = res.initial_loss;
  j["final_loss"] = res.final_loss;
  write_png_artifact(od / "relight_render.png", sc.render.render, c.overwrite);
  write_png_artifact(od / "relight_target.png", real, c.overwrite);
  write_png_artifact(od / "relight_result.png", res.relit, c.overwrite);
  write_text_artifact(od / "relight.json", j.dump(2) + "\n", c.overwrite);
  out << j.dump() << "\n";
  return kExitOk;
}

Series column_series(const CsvTable& t, const std::string& x, const std::string& y, const std::string& name) {
  const int xi = t.column(x), yi = t.column(y);
  if (xi < 0 || yi < 0) throw DomainError("CSV lacks column " + (xi < 0 ? x : y));
  Series s{name, {}, {}};
  for (const auto& row : t.rows) {
    s.x.push_back(std::stod(row.at(static_cast<std::size_t>(xi))));
    s.y.push_back(std::stod(row.at(static_cast<std::size_t>(yi))));
  }
  return s;
}

int cmd_report(const RunConfig& cfg, const Common& c, std::ostream& out) {
  const fs::path od = cfg.output_dir;
  OutputLock lock(od);
  int made = 0;
  if (fs::exists(od / "loss_trace.csv")) {
    const auto t = read_csv(od / "loss_trace.csv");
    const std::vector<Series> s{column_series(t, "round", "L_det2d", "L_det2d"),
                                column_series(t, "round", "L_det3d", "L_det3d"),
                                column_series(t, "round", "total", "total")};
    write_text_artifact(od / "loss_trace.svg", line_plot_svg("Training loss", "round", "loss", s), c.overwrite);
    ++made;
  }
  if (fs::exists(od / "sweep_asr.csv")) {
    const auto t = read_csv(od / "sweep_asr.csv");
    std::vector<Series> s;
    for (std::size_t k = 1; k < t.header.size(); ++k) s.push_back(column_series(t, "conf_thres", t.header[k], t.header[k]));
    write_text_artifact(od / "sweep_asr.svg", line_plot_svg("ASR vs confidence threshold", "conf_thres", "ASR", s),
                        c.overwrite);
    ++made;
  }
  if (fs::exists(od / "angle_sweep.csv")) {
    const auto t = read_csv(od / "angle_sweep.csv");
    write_text_artifact(od / "angle_sweep.svg",
                        polar_plot_svg("ASR by azimuth", {column_series(t, "angle_deg", "asr", "ASR")}), c.overwrite);
    ++made;
  }
  if (made == 0) throw IoError("no CSV inputs (loss_trace.csv, sweep_asr.csv, angle_sweep.csv) in " + od.string());
  out << "rendered " << made << " plot(s)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"advreal: adversarial garment patch toolkit", "advreal"};
  app.require_subcommand(0, 1);
  Common c;
  app.add_option("--config", c.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", c.sets, "Override a config key, e.g. --set attack.rounds=10 (repeatable)")
      ->allow_extra_args(false);
  app.add_flag("--overwrite", c.overwrite, "Replace existing artifacts");
  app.add_flag("--dump-config", c.dump_config, "Print the resolved config and exit");

  auto* gen = app.add_subcommand("gen-corpus", "Render the synthetic corpus");
  auto* tdf = app.add_subcommand("train-detector-fixture", "Train the toy detector fixture");
  auto* trn = app.add_subcommand("train", "Optimise an adversarial patch");
  std::string split = "train", resume;
  int log_every = 10;
  trn->add_option("--split", split, "Corpus split to train on (train, test, all)");
  trn->add_option("--resume", resume, "Patch PNG to resume from")->check(CLI::ExistingFile);
  trn->add_option("--log-every", log_every, "Print every N rounds (0 = quiet)");
  std::string patch_path, control;
  bool angles = false;
  auto add_patch_opts = [&](CLI::App* sc) {
    sc->add_option("--patch", patch_path, "Patch PNG")->check(CLI::ExistingFile);
    sc->add_option("--control", control, "Control instead of --patch: noise, gray, or clean (no patch)")->check(CLI::IsMember({"noise", "gray", "clean"}));
  };
  auto* ev = app.add_subcommand("eval", "Evaluate a patch");
  add_patch_opts(ev);
  ev->add_flag("--angles", angles, "3D azimuth sweep over eval.angles_deg");
  auto* sw = app.add_subcommand("sweep", "IoU x confidence threshold sweep");
  add_patch_opts(sw);
  auto* occ = app.add_subcommand("occlusion", "Centre-square occlusion protocol");
  add_patch_opts(occ);
  auto* dd = app.add_subcommand("deform-demo", "Stress, control points and TPS deformation of the garment");
  auto* rd = app.add_subcommand("relight-demo", "Relighting recovery on a rendered person");
  double alpha = 1.2, beta = 0.05;
  rd->add_option("--alpha", alpha, "Ground-truth gain");
  rd->add_option("--beta", beta, "Ground-truth offset");
  auto* rep = app.add_subcommand("report", "Render SVG plots from CSVs in the output directory");
  app.fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (app.get_subcommands().empty() && !c.dump_config) {
    err << "usage error: A subcommand is required\n" << app.help();
    return kExitUsage;
  }

  try {
    const RunConfig cfg = resolve(c);
    if (c.dump_config) {
      out << config_to_json(cfg).dump(2) << "\n";
      return kExitOk;
    }
    if (gen->parsed()) return cmd_gen_corpus(cfg, c, out);
    if (tdf->parsed()) return cmd_train_detector(cfg, c, out);
    if (trn->parsed()) return cmd_train(cfg, c, split, resume, log_every, out);
    if (ev->parsed()) return cmd_eval(cfg, c, patch_path, control, angles, out);
    if (sw->parsed()) return cmd_sweep(cfg, c, patch_path, control, out);
    if (occ->parsed()) return cmd_occlusion(cfg, c, patch_path, control, out);
    if (dd->parsed()) return cmd_deform_demo(cfg, c, out);
    if (rd->parsed()) return cmd_relight_demo(cfg, c, alpha, beta, out);
    if (rep->parsed()) return cmd_report(cfg, c, out);
  } catch (const attack::TrainAborted& e) {
    err << "error: {\"kind\":\"train_aborted\",\"round\":" << e.round << ",\"message\":" << nlohmann::json(e.what()).dump()
        << "}\n";
    return kExitModule;
  } catch (const DomainError& e) {
    err << "error: {\"kind\":\"domain\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitModule;
  } catch (const NumericalError& e) {
    err << "error: {\"kind\":\"numerical\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitModule;
  } catch (const IoError& e) {
    err << "error: {\"kind\":\"io\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitModule;
  } catch (const std::exception& e) {
    err << "error: {\"kind\":\"internal\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitModule;
  }
  return kExitUsage;
}

}  // namespace advreal::harness
