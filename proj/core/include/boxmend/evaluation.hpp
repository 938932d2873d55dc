/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxmend/dataset.hpp"
#include "boxmend/fmc.hpp"

namespace boxmend {

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Box box;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruth {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Box box;
};

struct MatchResult {
  std::vector<std::size_t> order;  // detection indices, confidence descending, stable
  std::vector<bool> true_positive; // aligned with `order`
  std::vector<bool> gt_matched;    // aligned with the ground-truth input
};

/// Greedy matching in confidence order: each detection takes the unmatched
/// ground truth of the same image and class with the highest IoU, provided the
/// IoU reaches the threshold. Equal confidences keep input order.
MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                             double iou_threshold = 0.5);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;
  std::optional<double> ap;  // unset when there is no ground truth
};

/// All-point interpolated AP over flags in confidence order.
PrCurve average_precision(const std::vector<bool>& flags, std::size_t num_gt);

/// Unweighted mean over defined APs. Throws NoEvaluableClasses.
double mean_ap(std::span<const std::optional<double>> aps);

struct ClassEvaluation {
  std::int64_t category_id = 0;
  std::string name;
  std::size_t num_gt = 0;
  std::size_t num_det = 0;
  std::size_t true_positives = 0;
  PrCurve curve;
};

struct EvaluationReport {
  double iou_threshold = 0.5;
  std::vector<ClassEvaluation> classes;  // taxonomy order
  double map = 0.0;

  nlohmann::ordered_json to_json() const;
};

EvaluationReport evaluate_detections(std::span<const Detection> dets, const Dataset& truth,
                                     double iou_threshold = 0.5);

/// COCO results format: [{"image_id","category_id","bbox":[x,y,w,h],"score"}].
std::vector<Detection> detections_from_json(const nlohmann::json& j);
nlohmann::ordered_json detections_to_json(std::span<const Detection> dets);
/// Every annotation becomes a detection with the given confidence.
std::vector<Detection> detections_from_dataset(const Dataset& d, double confidence = 1.0);

struct RobustnessProfile {
  double base_perf = 0.0;
  std::vector<std::pair<double, double>> levels;  // (noise level, perf)
  double mae = 0.0;        // mean |base - perf|
  double mean_drop = 0.0;  // mean (base - perf)

  nlohmann::ordered_json to_json() const;
  /// level,perf,drop rows for plotting.
  std::string to_csv() const;
};

/// Throws EmptyLevels.
RobustnessProfile robustness_mae(double base_perf, std::vector<std::pair<double, double>> levels);

/// Rows of "level,perf"; a header row is optional.
std::vector<std::pair<double, double>> parse_levels_csv(std::string_view text);

struct IouSummary {
  double noisy_mean = 0.0;
  double noisy_median = 0.0;
  double corrected_mean = 0.0;
  double corrected_median = 0.0;
};

struct CorrectionReport {
  std::size_t annotations = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  IouSummary overall;
  std::map<std::string, std::size_t> reject_reasons;
  struct PerClass {
    std::string name;
    std::size_t annotations = 0;
    std::size_t accepted = 0;
    IouSummary iou;
  };
  std::vector<PerClass> per_class;  // taxonomy order, classes with annotations only

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Compares noisy and corrected boxes against truth by annotation id.
/// Throws CorrespondenceError when ids or records do not line up.
CorrectionReport correction_report(const Dataset& noisy, const Dataset& corrected, const Dataset& truth,
                                   const std::vector<CorrectionRecord>& records);

/// Mean IoU of `d` against `truth` by annotation id.
double mean_iou_against(const Dataset& d, const Dataset& truth);

}  // namespace boxmend
