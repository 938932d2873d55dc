/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "boxmend/error.hpp"

namespace boxmend {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                             double iou_threshold) {
  MatchResult m;
  m.order.resize(dets.size());
  std::iota(m.order.begin(), m.order.end(), std::size_t{0});
  std::stable_sort(m.order.begin(), m.order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  m.gt_matched.assign(gts.size(), false);
  m.true_positive.assign(dets.size(), false);

  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> gt_index;
  for (std::size_t g = 0; g < gts.size(); ++g) gt_index[{gts[g].image_id, gts[g].category_id}].push_back(g);

  for (std::size_t r = 0; r < m.order.size(); ++r) {
    const Detection& d = dets[m.order[r]];
    const auto it = gt_index.find({d.image_id, d.category_id});
    if (it == gt_index.end()) continue;
    double best = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g : it->second) {
      if (m.gt_matched[g]) continue;
      const double v = iou(d.box, gts[g].box);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best >= iou_threshold) {
      m.gt_matched[best_gt] = true;
      m.true_positive[r] = true;
    }
  }
  return m;
}

PrCurve average_precision(const std::vector<bool>& flags, std::size_t num_gt) {
  PrCurve curve;
  std::size_t tp = 0;
  curve.points.reserve(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) ++tp;
    const double recall = num_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(num_gt);
    curve.points.push_back({recall, static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  if (num_gt == 0) return curve;

  // Precision envelope: best precision at this or any later rank.
  std::vector<double> envelope(curve.points.size());
  double running = 0.0;
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    running = std::max(running, curve.points[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    ap += (curve.points[i].recall - prev_recall) * envelope[i];
    prev_recall = curve.points[i].recall;
  }
  curve.ap = ap;
  return curve;
}

double mean_ap(std::span<const std::optional<double>> aps) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& ap : aps) {
    if (ap) {
      sum += *ap;
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::kNoEvaluableClasses, "no class has ground truth");
  return sum / static_cast<double>(n);
}

EvaluationReport evaluate_detections(std::span<const Detection> dets, const Dataset& truth, double iou_threshold) {
  EvaluationReport report;
  report.iou_threshold = iou_threshold;
  std::vector<std::optional<double>> aps;
  for (const auto& cat : truth.categories) {
    std::vector<Detection> cd;
    std::vector<GroundTruth> cg;
    for (const auto& d : dets) {
      if (d.category_id == cat.id) cd.push_back(d);
    }
    for (const auto& a : truth.annotations) {
      if (a.category_id == cat.id) cg.push_back({a.image_id, a.category_id, a.box});
    }
    const auto m = match_detections(cd, cg, iou_threshold);
    ClassEvaluation ce;
    ce.category_id = cat.id;
    ce.name = cat.name;
    ce.num_gt = cg.size();
    ce.num_det = cd.size();
    ce.true_positives = static_cast<std::size_t>(std::count(m.true_positive.begin(), m.true_positive.end(), true));
    ce.curve = average_precision(m.true_positive, cg.size());
    aps.push_back(ce.curve.ap);
    report.classes.push_back(std::move(ce));
  }
  report.map = mean_ap(aps);
  return report;
}

nlohmann::ordered_json EvaluationReport::to_json() const {
  nlohmann::ordered_json j;
  j["iou_threshold"] = iou_threshold;
  j["map"] = map;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : classes) {
    nlohmann::ordered_json e;
    e["category_id"] = c.category_id;
    e["name"] = c.name;
    e["num_gt"] = c.num_gt;
    e["num_det"] = c.num_det;
    e["true_positives"] = c.true_positives;
    e["ap"] = c.curve.ap ? nlohmann::ordered_json(*c.curve.ap) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(e));
  }
  j["classes"] = std::move(arr);
  return j;
}

std::vector<Detection> detections_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorCode::kSchemaError, "detections must be a JSON array");
  std::vector<Detection> out;
  out.reserve(j.size());
  try {
    for (const auto& e : j) {
      const auto bbox = e.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) fail(ErrorCode::kSchemaError, "detection bbox must have 4 entries");
      Detection d;
      d.image_id = e.at("image_id").get<std::int64_t>();
      d.category_id = e.at("category_id").get<std::int64_t>();
      d.box = Box::from_top_left(bbox[0], bbox[1], bbox[2], bbox[3]);
      d.confidence = e.at("score").get<double>();
      if (!d.box.valid()) fail(ErrorCode::kInvalidBox, "detection with non-positive size");
      if (!std::isfinite(d.confidence)) fail(ErrorCode::kNonFiniteInput, "detection confidence must be finite");
      out.push_back(d);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("detection: ") + e.what());
  }
  return out;
}

nlohmann::ordered_json detections_to_json(std::span<const Detection> dets) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : dets) {
    const auto tl = d.box.top_left();
    arr.push_back({{"image_id", d.image_id},
                   {"category_id", d.category_id},
                   {"bbox", {tl[0], tl[1], tl[2], tl[3]}},
                   {"score", d.confidence}});
  }
  return arr;
}

std::vector<Detection> detections_from_dataset(const Dataset& d, double confidence) {
  std::vector<Detection> out;
  out.reserve(d.annotations.size());
  for (const auto& a : d.annotations) out.push_back({a.image_id, a.category_id, a.box, confidence});
  return out;
}

RobustnessProfile robustness_mae(double base_perf, std::vector<std::pair<double, double>> levels) {
  if (levels.empty()) fail(ErrorCode::kEmptyLevels, "no noise levels given");
  RobustnessProfile p;
  p.base_perf = base_perf;
  double abs_sum = 0.0;
  double signed_sum = 0.0;
  for (const auto& [level, perf] : levels) {
    abs_sum += std::abs(base_perf - perf);
    signed_sum += base_perf - perf;
  }
  const auto n = static_cast<double>(levels.size());
  p.mae = abs_sum / n;
  p.mean_drop = signed_sum / n;
  p.levels = std::move(levels);
  return p;
}

nlohmann::ordered_json RobustnessProfile::to_json() const {
  nlohmann::ordered_json j;
  j["base_perf"] = base_perf;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [level, perf] : levels) arr.push_back({{"level", level}, {"perf", perf}});
  j["levels"] = std::move(arr);
  j["mae"] = mae;
  j["mean_drop"] = mean_drop;
  return j;
}

std::string RobustnessProfile::to_csv() const {
  std::string out = "level,perf,drop\n";
  for (const auto& [level, perf] : levels) out += num(level) + "," + num(perf) + "," + num(base_perf - perf) + "\n";
  return out;
}

std::vector<std::pair<double, double>> parse_levels_csv(std::string_view text) {
  std::vector<std::pair<double, double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto parse = [&](std::string s, double& out) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    s = s.substr(b, e - b + 1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    double level = 0.0;
    double perf = 0.0;
    const bool ok = comma != std::string::npos && parse(line.substr(0, comma), level) &&
                    parse(line.substr(comma + 1), perf);
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;  // header
      fail(ErrorCode::kParseError, "line " + std::to_string(lineno) + ": expected \"level,perf\"");
    }
    rows.emplace_back(level, perf);
  }
  return rows;
}

namespace {

IouSummary summarize(const std::vector<double>& noisy, const std::vector<double>& corrected) {
  return {mean_of(noisy), median_of(noisy), mean_of(corrected), median_of(corrected)};
}

nlohmann::ordered_json summary_json(const IouSummary& s) {
  return {{"noisy_mean_iou", s.noisy_mean},
          {"noisy_median_iou", s.noisy_median},
          {"corrected_mean_iou", s.corrected_mean},
          {"corrected_median_iou", s.corrected_median}};
}

}  // namespace

CorrectionReport correction_report(const Dataset& noisy, const Dataset& corrected, const Dataset& truth,
                                   const std::vector<CorrectionRecord>& records) {
  std::map<std::int64_t, const Annotation*> corrected_by_id;
  std::map<std::int64_t, const Annotation*> truth_by_id;
  std::map<std::int64_t, const CorrectionRecord*> record_by_id;
  for (const auto& a : corrected.annotations) corrected_by_id.emplace(a.id, &a);
  for (const auto& a : truth.annotations) truth_by_id.emplace(a.id, &a);
  for (const auto& r : records) record_by_id.emplace(r.annotation_id, &r);
  const std::size_t n = noisy.annotations.size();
  if (corrected_by_id.size() != n || truth_by_id.size() != n || record_by_id.size() != n) {
    fail(ErrorCode::kCorrespondenceError, "noisy, corrected, truth and records must cover the same annotations");
  }

  CorrectionReport report;
  report.annotations = n;
  std::vector<double> all_noisy, all_corrected;
  struct Acc {
    std::size_t count = 0, accepted = 0;
    std::vector<double> noisy, corrected;
  };
  std::map<std::int64_t, Acc> per_class;
  for (const auto& a : noisy.annotations) {
    const auto c = corrected_by_id.find(a.id);
    const auto t = truth_by_id.find(a.id);
    const auto r = record_by_id.find(a.id);
    if (c == corrected_by_id.end() || t == truth_by_id.end() || r == record_by_id.end()) {
      fail(ErrorCode::kCorrespondenceError, "annotation " + std::to_string(a.id) + " is missing a counterpart");
    }
    const double iou_noisy = iou(a.box, t->second->box);
    const double iou_corrected = iou(c->second->box, t->second->box);
    all_noisy.push_back(iou_noisy);
    all_corrected.push_back(iou_corrected);
    auto& acc = per_class[a.category_id];
    ++acc.count;
    acc.noisy.push_back(iou_noisy);
    acc.corrected.push_back(iou_corrected);
    if (r->second->accepted) {
      ++report.accepted;
      ++acc.accepted;
    } else if (r->second->reject_reason) {
      ++report.reject_reasons[std::string(to_string(*r->second->reject_reason))];
    }
  }
  report.acceptance_rate = n == 0 ? 0.0 : static_cast<double>(report.accepted) / static_cast<double>(n);
  report.overall = summarize(all_noisy, all_corrected);
  for (const auto& cat : noisy.categories) {
    const auto it = per_class.find(cat.id);
    if (it == per_class.end()) continue;
    report.per_class.push_back(
        {cat.name, it->second.count, it->second.accepted, summarize(it->second.noisy, it->second.corrected)});
  }
  return report;
}

nlohmann::ordered_json CorrectionReport::to_json() const {
  nlohmann::ordered_json j;
  j["annotations"] = annotations;
  j["accepted"] = accepted;
  j["acceptance_rate"] = acceptance_rate;
  const auto summary = summary_json(overall);
  for (const auto& [k, v] : summary.items()) j[k] = v;
  nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
  for (const auto& [k, v] : reject_reasons) reasons[k] = v;
  j["reject_reasons"] = std::move(reasons);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : per_class) {
    nlohmann::ordered_json e;
    e["class"] = c.name;
    e["annotations"] = c.annotations;
    e["accepted"] = c.accepted;
    const auto summary = summary_json(c.iou);
    for (const auto& [k, v] : summary.items()) e[k] = v;
    arr.push_back(std::move(e));
  }
  j["per_class"] = std::move(arr);
  return j;
}

std::string CorrectionReport::to_csv() const {
  std::string out =
      "class,annotations,accepted,noisy_mean_iou,noisy_median_iou,corrected_mean_iou,corrected_median_iou\n";
  auto row = [&](const std::string& name, std::size_t count, std::size_t acc, const IouSummary& s) {
    out += name + "," + std::to_string(count) + "," + std::to_string(acc) + "," + num(s.noisy_mean) + "," +
           num(s.noisy_median) + "," + num(s.corrected_mean) + "," + num(s.corrected_median) + "\n";
  };
  row("all", annotations, accepted, overall);
  for (const auto& c : per_class) row(c.name, c.annotations, c.accepted, c.iou);
  return out;
}

double mean_iou_against(const Dataset& d, const Dataset& truth) {
  std::map<std::int64_t, const Annotation*> truth_by_id;
  for (const auto& a : truth.annotations) truth_by_id.emplace(a.id, &a);
  std::vector<double> v;
  v.reserve(d.annotations.size());
  for (const auto& a : d.annotations) {
    const auto it = truth_by_id.find(a.id);
    if (it == truth_by_id.end()) fail(ErrorCode::kCorrespondenceError, "annotation " + std::to_string(a.id));
    v.push_back(iou(a.box, it->second->box));
  }
  return mean_of(v);
}

}  // namespace boxmend
