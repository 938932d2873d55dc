/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/interpolation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "boxmend/error.hpp"

namespace boxmend {

BoxPairFeatures box_pair_features(const Box& b_hat, const Box& b, ImageDims dims) {
  const double W = dims.width;
  const double H = dims.height;
  const double diag = std::hypot(W, H);
  return {
      b_hat.x1() / W, b_hat.y1() / H, b_hat.x2() / W, b_hat.y2() / H,
      b.x1() / W,     b.y1() / H,     b.x2() / W,     b.y2() / H,
      iou(b_hat, b),
      std::hypot(b_hat.cx - b.cx, b_hat.cy - b.cy) / diag,
      std::log(b_hat.w / b.w),
      std::log(b_hat.h / b.h),
  };
}

double gamma_oracle(const Box& b_hat, const Box& b, const Box& b_true) {
  double best_gamma = 0.0;
  double best_iou = -1.0;
  for (int step = 0; step <= 100; ++step) {
    const double gamma = step / 100.0;
    const double v = iou(interpolate_boxes(b_hat, b, gamma), b_true);
    if (v > best_iou) {
      best_iou = v;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

std::vector<TrainingPair> make_training_pairs(const Dataset& corrected, const Dataset& noisy, const Dataset& truth) {
  std::vector<TrainingPair> pairs;
  for (const auto& n : noisy.annotations) {
    const Annotation* c = corrected.find_annotation(n.id);
    const Annotation* t = truth.find_annotation(n.id);
    const ImageRecord* image = noisy.find_image(n.image_id);
    if (c == nullptr || t == nullptr || image == nullptr) {
      fail(ErrorCode::kCorrespondenceError, "annotation " + std::to_string(n.id) + " is missing a counterpart");
    }
    if (c->box == n.box) continue;
    pairs.push_back({box_pair_features(c->box, n.box, image->dims), gamma_oracle(c->box, n.box, t->box)});
  }
  return pairs;
}

MixingPolicy MixingPolicy::constant_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorCode::kGammaOutOfRange, "constant gamma must lie in [0,1]");
  MixingPolicy p;
  p.kind = Kind::kConstant;
  p.constant = gamma;
  return p;
}

MixingPolicy MixingPolicy::heuristic() {
  MixingPolicy p;
  p.kind = Kind::kHeuristic;
  return p;
}

MixingPolicy MixingPolicy::learned(MlpParams params) {
  params.check();
  MixingPolicy p;
  p.kind = Kind::kLearned;
  p.params = std::move(params);
  return p;
}

std::string MixingPolicy::describe() const {
  switch (kind) {
    case Kind::kConstant: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), constant);
      return "constant:" + std::string(buf, res.ptr);
    }
    case Kind::kHeuristic: return "heuristic";
    case Kind::kLearned: return "learned";
  }
  return "unknown";
}

double MixingPolicy::gamma(const Box& b_hat, const Box& b, ImageDims dims, const CorrectionRecord* record) const {
  switch (kind) {
    case Kind::kConstant: return constant;
    case Kind::kHeuristic:
      if (record == nullptr) fail(ErrorCode::kCorrespondenceError, "heuristic policy needs a correction record");
      return std::clamp(record->fused_score, 0.0, 1.0);
    case Kind::kLearned: return mlp_forward(*params, box_pair_features(b_hat, b, dims));
  }
  return 0.0;
}

Dataset apply_interpolation(const Dataset& corrected, const Dataset& noisy,
                            const std::vector<CorrectionRecord>& records, const MixingPolicy& policy) {
  std::map<std::int64_t, const Annotation*> corrected_by_id;
  for (const auto& a : corrected.annotations) corrected_by_id.emplace(a.id, &a);
  std::set<std::int64_t> noisy_ids;
  for (const auto& a : noisy.annotations) noisy_ids.insert(a.id);
  if (corrected_by_id.size() != noisy_ids.size() ||
      !std::all_of(noisy_ids.begin(), noisy_ids.end(), [&](auto id) { return corrected_by_id.contains(id); })) {
    fail(ErrorCode::kCorrespondenceError, "corrected and noisy datasets have different annotation ids");
  }
  std::map<std::int64_t, const CorrectionRecord*> record_by_id;
  for (const auto& r : records) {
    if (!noisy_ids.contains(r.annotation_id)) {
      fail(ErrorCode::kCorrespondenceError, "record for unknown annotation " + std::to_string(r.annotation_id));
    }
    record_by_id.emplace(r.annotation_id, &r);
  }
  std::map<std::int64_t, ImageDims> dims_by_image;
  for (const auto& im : noisy.images) dims_by_image.emplace(im.id, im.dims);

  Dataset out = noisy;
  nlohmann::json gammas = nlohmann::json::object();
  for (auto& a : out.annotations) {
    const Box& b_hat = corrected_by_id.at(a.id)->box;
    const auto rec_it = record_by_id.find(a.id);
    const CorrectionRecord* rec = rec_it == record_by_id.end() ? nullptr : rec_it->second;
    const auto dims_it = dims_by_image.find(a.image_id);
    if (dims_it == dims_by_image.end()) fail(ErrorCode::kDanglingReference, "annotation " + std::to_string(a.id));
    const double gamma = policy.gamma(b_hat, a.box, dims_it->second, rec);
    a.box = interpolate_boxes(b_hat, a.box, gamma);
    a.mask.reset();
    gammas[std::to_string(a.id)] = gamma;
  }
  out.provenance["stage"] = "interpolated";
  out.provenance["policy"] = policy.describe();
  out.provenance["gamma"] = std::move(gammas);
  return out;
}

}  // namespace boxmend
