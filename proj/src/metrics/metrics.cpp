#include "advreal/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "advreal/core/errors.hpp"
#include "advreal/core/log.hpp"

namespace advreal::metrics {
namespace {

void check_threshold(double t, const char* what) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError(std::string(what) + " threshold outside (0,1)");
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) { return detect::box_iou(a, b); }

bool attack_success(const std::vector<Detection>& dets, const BoundingBox& gt, double iou_thres, double conf_thres) {
  check_threshold(iou_thres, "iou");
  check_threshold(conf_thres, "confidence");
  for (const auto& d : dets) {
    if (d.label == detect::kPersonLabel && d.confidence >= conf_thres && iou(d.box, gt) >= iou_thres) return false;
  }
  return true;
}

EvalReport evaluate_detections(const std::vector<SampleDetections>& samples, const Thresholds& thr) {
  if (samples.empty()) throw DomainError("empty corpus");
  check_threshold(thr.iou, "iou");
  check_threshold(thr.conf, "confidence");
  EvalReport r;
  r.thresholds = thr;
  double conf_sum = 0.0;
  for (const auto& s : samples) {
    for (const auto& gt : s.gts) {
      ++r.counts.total;
      if (attack_success(s.detections, gt, thr.iou, thr.conf)) ++r.counts.successes;
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < s.detections.size(); ++i) {
      const auto& d = s.detections[i];
      if (d.confidence >= detect::kConfidenceFloor) {
        conf_sum += d.confidence;
        ++r.counts.detections;
      }
      if (d.label == detect::kPersonLabel && d.confidence >= thr.conf) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.detections[a].confidence > s.detections[b].confidence;
    });
    std::vector<bool> used(s.gts.size(), false);
    for (std::size_t i : order) {
      int best = -1;
      double best_iou = thr.iou;
      for (std::size_t g = 0; g < s.gts.size(); ++g) {
        if (used[g]) continue;
        const double v = iou(s.detections[i].box, s.gts[g]);
        if (v >= best_iou && (best < 0 || v > best_iou)) {
          best = static_cast<int>(g);
          best_iou = v;
        }
      }
      if (best >= 0) {
        used[static_cast<std::size_t>(best)] = true;
        ++r.counts.tp;
      } else {
        ++r.counts.fp;
      }
    }
    r.counts.fn += static_cast<long>(std::count(used.begin(), used.end(), false));
  }
  if (r.counts.total == 0) throw DomainError("corpus has no ground-truth boxes");
  r.asr = static_cast<double>(r.counts.successes) / static_cast<double>(r.counts.total);
  const long pd = r.counts.tp + r.counts.fp;
  const long rd = r.counts.tp + r.counts.fn;
  r.precision_undefined = pd == 0;
  r.recall_undefined = rd == 0;
  r.precision = pd == 0 ? 0.0 : static_cast<double>(r.counts.tp) / static_cast<double>(pd);
  r.recall = rd == 0 ? 0.0 : static_cast<double>(r.counts.tp) / static_cast<double>(rd);
  r.f1_undefined = r.precision_undefined || r.recall_undefined || r.precision + r.recall == 0.0;
  r.f1 = r.f1_undefined ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  r.avg_confidence_undefined = r.counts.detections == 0;
  r.avg_confidence = r.counts.detections == 0 ? 0.0 : conf_sum / static_cast<double>(r.counts.detections);
  return r;
}

EvalReport evaluate_corpus(const std::vector<EvalSample>& samples, const DetectorFn& detector, const Thresholds& thr) {
  if (samples.empty()) throw DomainError("empty corpus");
  std::vector<SampleDetections> dets;
  dets.reserve(samples.size());
  for (const auto& s : samples) dets.push_back({detector(s.image), s.gts});
  return evaluate_detections(dets, thr);
}

std::vector<double> default_iou_grid() { return {0.1, 0.3, 0.5, 0.7, 0.9}; }

std::vector<double> default_conf_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 9; ++i) g.push_back(i / 10.0);
  return g;
}

std::vector<SweepCell> sweep(const std::vector<SampleDetections>& samples, const std::vector<double>& iou_grid,
                             const std::vector<double>& conf_grid) {
  if (iou_grid.empty() || conf_grid.empty()) throw DomainError("empty threshold grid");
  std::vector<SweepCell> cells;
  for (double i : iou_grid) {
    for (double c : conf_grid) cells.push_back({i, c, evaluate_detections(samples, {i, c})});
  }
  return cells;
}

std::vector<SweepCell> sweep(const std::vector<EvalSample>& samples, const DetectorFn& detector,
                             const std::vector<double>& iou_grid, const std::vector<double>& conf_grid) {
  if (samples.empty()) throw DomainError("empty corpus");
  std::vector<SampleDetections> dets;
  for (const auto& s : samples) dets.push_back({detector(s.image), s.gts});
  return sweep(dets, iou_grid, conf_grid);
}

EvalReport evaluate_patch_2d(const Image& patch, const std::vector<attack::PersonSample>& samples,
                             const DetectorFn& detector, const Thresholds& thr) {
  if (samples.empty()) throw DomainError("empty corpus");
  std::vector<SampleDetections> dets;
  for (const auto& s : samples) {
    const auto placed = attack::apply_2d(patch, s.image, s.box, attack::Transform2D{});
    dets.push_back({detector(placed.image), {s.box}});
  }
  return evaluate_detections(dets, thr);
}

OcclusionResult occlusion_protocol(const Image& patch, const std::vector<attack::PersonSample>& samples,
                                   const DetectorFn& detector, const Thresholds& thr) {
  constexpr double kFraction = static_cast<double>(kProtocolSquare * kProtocolSquare) /
                               static_cast<double>(kProtocolPatchSize * kProtocolPatchSize);
  OcclusionResult out;
  out.scaled = patch.width != kProtocolPatchSize || patch.height != kProtocolPatchSize;
  if (out.scaled) warn("patch is not 300x300; occluding 1/9 of its area");
  out.square_width = static_cast<int>(std::lround(std::sqrt(kFraction) * patch.width));
  out.square_height = static_cast<int>(std::lround(std::sqrt(kFraction) * patch.height));
  out.report = evaluate_patch_2d(attack::occlude_center(patch, kFraction), samples, detector, thr);
  return out;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["asr"] = r.asr;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["avg_confidence"] = r.avg_confidence;
  j["counts"] = {{"tp", r.counts.tp},
                 {"fp", r.counts.fp},
                 {"fn", r.counts.fn},
                 {"successes", r.counts.successes},
                 {"total", r.counts.total},
                 {"detections", r.counts.detections}};
  j["thresholds"] = {{"iou", r.thresholds.iou}, {"conf", r.thresholds.conf}};
  j["undefined"] = {{"precision", r.precision_undefined},
                    {"recall", r.recall_undefined},
                    {"f1", r.f1_undefined},
                    {"avg_confidence", r.avg_confidence_undefined}};
  return j.dump(2) + "\n";
}

void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "iou_thres,conf_thres,asr,precision,recall,f1,avg_confidence,tp,fp,fn,successes,total\n";
  out << fmt(r.thresholds.iou) << ',' << fmt(r.thresholds.conf) << ',' << fmt(r.asr) << ',' << fmt(r.precision)
      << ',' << fmt(r.recall) << ',' << fmt(r.f1) << ',' << fmt(r.avg_confidence) << ',' << r.counts.tp << ','
      << r.counts.fp << ',' << r.counts.fn << ',' << r.counts.successes << ',' << r.counts.total << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "iou_thres,conf_thres,asr,precision,recall,f1,avg_confidence,tp,fp,fn,successes,total\n";
  for (const auto& c : cells) {
    const auto& r = c.report;
    out << fmt(c.iou) << ',' << fmt(c.conf) << ',' << fmt(r.asr) << ',' << fmt(r.precision) << ','
        << fmt(r.recall) << ',' << fmt(r.f1) << ',' << fmt(r.avg_confidence) << ',' << r.counts.tp << ','
        << r.counts.fp << ',' << r.counts.fn << ',' << r.counts.successes << ',' << r.counts.total << '\n';
  }
}

void write_sweep_asr_table(std::ostream& out, const std::vector<SweepCell>& cells) {
  std::vector<double> ious, confs;
  std::map<std::pair<double, double>, double> asr;
  for (const auto& c : cells) {
    if (std::find(ious.begin(), ious.end(), c.iou) == ious.end()) ious.push_back(c.iou);
    if (std::find(confs.begin(), confs.end(), c.conf) == confs.end()) confs.push_back(c.conf);
    asr[{c.iou, c.conf}] = c.report.asr;
  }
  out << "conf_thres";
  for (double i : ious) out << ",IoU=" << fmt(i);
  out << '\n';
  for (double c : confs) {
    out << fmt(c);
    for (double i : ious) {
      out << ',';
      const auto it = asr.find({i, c});
      if (it != asr.end()) out << fmt(it->second);
    }
    out << '\n';
  }
}

}  // namespace advreal::metrics
