#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "advreal/attack/train.hpp"
#include "advreal/core/image.hpp"
#include "advreal/detect/detection.hpp"

namespace advreal::metrics {

using detect::Detection;
using scene::BoundingBox;

struct Thresholds {
  double iou = 0.5;
  double conf = 0.5;
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// True iff no person detection reaches both IoU >= iou_thres and confidence >= conf_thres.
bool attack_success(const std::vector<Detection>& dets, const BoundingBox& gt, double iou_thres = 0.5,
                    double conf_thres = 0.5);

struct EvalCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long successes = 0;
  long total = 0;       // ground-truth boxes
  long detections = 0;  // detections at or above the confidence floor, used for AC
};

struct EvalReport {
  double asr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double avg_confidence = 0.0;
  EvalCounts counts;
  Thresholds thresholds;
  // Set when the corresponding denominator was zero and the value is the 0 sentinel.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool avg_confidence_undefined = false;
};

struct SampleDetections {
  std::vector<Detection> detections;
  std::vector<BoundingBox> gts;
};

struct EvalSample {
  Image image;
  std::vector<BoundingBox> gts;
};

using DetectorFn = std::function<std::vector<Detection>(const Image&)>;

/// Metrics over precomputed detections. Detections are matched one-to-one to
/// ground truths greedily by descending confidence.
EvalReport evaluate_detections(const std::vector<SampleDetections>& samples, const Thresholds& thr);
EvalReport evaluate_corpus(const std::vector<EvalSample>& samples, const DetectorFn& detector,
                           const Thresholds& thr = {});

std::vector<double> default_iou_grid();   // 0.1, 0.3, 0.5, 0.7, 0.9
std::vector<double> default_conf_grid();  // 0.1 .. 0.9 step 0.1

struct SweepCell {
  double iou = 0.0;
  double conf = 0.0;
  EvalReport report;
};

/// One report per (iou, conf) cell, iou-major order. Detections are computed once.
std::vector<SweepCell> sweep(const std::vector<SampleDetections>& samples, const std::vector<double>& iou_grid,
                             const std::vector<double>& conf_grid);
std::vector<SweepCell> sweep(const std::vector<EvalSample>& samples, const DetectorFn& detector,
                             const std::vector<double>& iou_grid, const std::vector<double>& conf_grid);

struct OcclusionResult {
  EvalReport report;
  int square_width = 0;
  int square_height = 0;
  bool scaled = false;  // patch was not 300x300; the square covers 1/9 of its area instead
};

inline constexpr int kProtocolPatchSize = 300;
inline constexpr int kProtocolSquare = 100;

/// Places the patch (centre 100x100 gray square) on every person at its box centre and evaluates.
OcclusionResult occlusion_protocol(const Image& patch, const std::vector<attack::PersonSample>& samples,
                                   const DetectorFn& detector, const Thresholds& thr = {});

/// Evaluates the patch placed with the identity transform on every person.
EvalReport evaluate_patch_2d(const Image& patch, const std::vector<attack::PersonSample>& samples,
                             const DetectorFn& detector, const Thresholds& thr = {});

std::string report_to_json(const EvalReport& r);
void write_report_csv(std::ostream& out, const EvalReport& r);
/// Long form: iou_thres,conf_thres,asr,precision,recall,f1,avg_confidence,tp,fp,fn,successes,total
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);
/// ASR table: conf_thres,IoU=0.1,IoU=0.3,...
void write_sweep_asr_table(std::ostream& out, const std::vector<SweepCell>& cells);

}  // namespace advreal::metrics
