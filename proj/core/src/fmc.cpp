/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/fmc.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "boxmend/error.hpp"

namespace boxmend {

void check_config(const FmcConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) fail(ErrorCode::kInvalidArgument, "alpha must lie in [0,1]");
  if (!(cfg.lambda_iou >= 0.0 && cfg.lambda_iou <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "lambda must lie in [0,1]");
  }
  if (cfg.candidates_per_prompt < 1) fail(ErrorCode::kInvalidArgument, "candidates per prompt must be >= 1");
}

std::string_view to_string(PromptSource s) { return s == PromptSource::kBox ? "box" : "point"; }

PromptSource prompt_source_from_string(std::string_view s) {
  if (s == "box") return PromptSource::kBox;
  if (s == "point") return PromptSource::kPoint;
  fail(ErrorCode::kSchemaError, "unknown prompt source \"" + std::string(s) + "\"");
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kLowIou: return "low-iou";
    case RejectReason::kEmptyMask: return "empty-mask";
    case RejectReason::kProviderError: return "provider-error";
  }
  return "unknown";
}

RejectReason reject_reason_from_string(std::string_view s) {
  if (s == "low-iou") return RejectReason::kLowIou;
  if (s == "empty-mask") return RejectReason::kEmptyMask;
  if (s == "provider-error") return RejectReason::kProviderError;
  fail(ErrorCode::kSchemaError, "unknown reject reason \"" + std::string(s) + "\"");
}

PromptSets build_prompts(const std::vector<Box>& boxes) {
  PromptSets sets;
  sets.boxes.reserve(boxes.size());
  sets.points.reserve(boxes.size());
  for (const auto& b : boxes) {
    sets.boxes.push_back(Prompt::from_box(b));
    sets.points.push_back(Prompt::from_point(box_center(b)));
  }
  return sets;
}

namespace {

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.code(), context + ": " + e.detail());
}

void check_segment_arity(const SegmentResponse& resp, std::size_t prompts, int k) {
  if (resp.results.size() != prompts) {
    fail(ErrorCode::kArityMismatch, "expected " + std::to_string(prompts) + " prompt results, got " +
                                        std::to_string(resp.results.size()));
  }
  for (const auto& r : resp.results) {
    if (r.size() != static_cast<std::size_t>(k)) {
      fail(ErrorCode::kArityMismatch,
           "expected " + std::to_string(k) + " candidates per prompt, got " + std::to_string(r.size()));
    }
  }
}

}  // namespace

std::vector<CandidateSet> gather_candidates(MaskProvider& provider, const std::string& image_ref,
                                            const std::vector<Box>& boxes, const FmcConfig& cfg) {
  check_config(cfg);
  std::vector<CandidateSet> sets(boxes.size());
  for (std::size_t j = 0; j < boxes.size(); ++j) sets[j].object_index = j;
  if (boxes.empty()) return sets;

  const auto prompts = build_prompts(boxes);
  const std::pair<PromptSource, const std::vector<Prompt>*> calls[] = {
      {PromptSource::kBox, &prompts.boxes},
      {PromptSource::kPoint, &prompts.points},
  };
  for (const auto& [source, list] : calls) {
    SegmentRequest req;
    req.image_ref = image_ref;
    req.prompts = *list;
    req.candidates_per_prompt = cfg.candidates_per_prompt;
    SegmentResponse resp;
    try {
      resp = provider.segment(req);
      check_segment_arity(resp, list->size(), cfg.candidates_per_prompt);
    } catch (const Error& e) {
      rethrow_with_context(e, std::string(to_string(source)) + "-prompt segment call for " + image_ref + " (" +
                                  std::to_string(boxes.size()) + " objects)");
    }
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      for (int k = 0; k < cfg.candidates_per_prompt; ++k) {
        auto& scored = resp.results[j][static_cast<std::size_t>(k)];
        if (scored.mask.empty()) {
          ++sets[j].dropped_empty;
          continue;
        }
        sets[j].candidates.push_back(Candidate{std::move(scored.mask), scored.score, std::nullopt, source, k});
      }
    }
  }
  return sets;
}

CandidateSet score_candidates(MaskProvider& provider, const std::string& image_ref, CandidateSet cs,
                              const std::string& class_name) {
  if (cs.candidates.empty()) fail(ErrorCode::kEmptyCandidateSet, "object " + std::to_string(cs.object_index));
  ScoreRequest req;
  req.image_ref = image_ref;
  req.class_name = class_name;
  req.masks.reserve(cs.candidates.size());
  for (const auto& c : cs.candidates) req.masks.push_back(c.mask);
  ScoreResponse resp;
  try {
    resp = provider.score(req);
  } catch (const Error& e) {
    rethrow_with_context(e, "score call for object " + std::to_string(cs.object_index));
  }
  if (resp.scores.size() != cs.candidates.size()) {
    fail(ErrorCode::kArityMismatch, "object " + std::to_string(cs.object_index) + ": sent " +
                                        std::to_string(cs.candidates.size()) + " masks, got " +
                                        std::to_string(resp.scores.size()) + " scores");
  }
  for (std::size_t k = 0; k < resp.scores.size(); ++k) cs.candidates[k].clip_score = resp.scores[k];
  return cs;
}

Selection fuse_and_select(const CandidateSet& cs, double alpha) {
  if (cs.candidates.empty()) fail(ErrorCode::kEmptyCandidateSet, "object " + std::to_string(cs.object_index));
  Selection sel;
  for (const auto& c : cs.candidates) {
    if (!c.clip_score) fail(ErrorCode::kInvalidArgument, "candidate without a label score");
    const double fused = alpha * *c.clip_score + (1.0 - alpha) * c.sam_score;
    const bool better =
        sel.best == nullptr || fused > sel.fused_score ||
        (fused == sel.fused_score &&
         std::tuple(c.source, c.index) < std::tuple(sel.best->source, sel.best->index));
    if (better) {
      sel.best = &c;
      sel.fused_score = fused;
    }
  }
  return sel;
}

CorrectionRecord filter_correction(std::int64_t annotation_id, const Box& noisy, const Mask& best_mask,
                                   const FmcConfig& cfg, ImageDims dims) {
  CorrectionRecord rec;
  rec.annotation_id = annotation_id;
  rec.corrected_box = noisy;
  if (best_mask.empty()) {
    rec.reject_reason = RejectReason::kEmptyMask;
    return rec;
  }
  const Box b_hat = mask_to_box(best_mask);
  rec.iou_noisy_corrected = iou(clip_box(noisy, dims), b_hat);
  if (rec.iou_noisy_corrected >= cfg.lambda_iou) {
    rec.accepted = true;
    rec.corrected_box = b_hat;
  } else {
    rec.reject_reason = RejectReason::kLowIou;
  }
  return rec;
}

namespace {

std::vector<CorrectionRecord> correct_image(const Dataset& d, const ImageRecord& image,
                                            const std::vector<const Annotation*>& anns, MaskProvider& provider,
                                            const FmcConfig& cfg, const std::string& image_ref) {
  std::vector<Box> boxes;
  boxes.reserve(anns.size());
  for (const auto* a : anns) boxes.push_back(a->box);

  auto sets = gather_candidates(provider, image_ref, boxes, cfg);
  std::vector<CorrectionRecord> records;
  records.reserve(anns.size());
  for (std::size_t j = 0; j < anns.size(); ++j) {
    const Annotation& a = *anns[j];
    if (sets[j].candidates.empty()) {
      CorrectionRecord rec;
      rec.annotation_id = a.id;
      rec.corrected_box = a.box;
      rec.reject_reason = RejectReason::kEmptyMask;
      rec.detail = "every candidate mask was empty";
      records.push_back(std::move(rec));
      continue;
    }
    for (const auto& c : sets[j].candidates) {
      if (c.mask.dims() != image.dims) {
        fail(ErrorCode::kProtocolError, "candidate mask size does not match image " + std::to_string(image.id));
      }
    }
    const Category* cat = d.find_category(a.category_id);
    const auto scored = score_candidates(provider, image_ref, std::move(sets[j]), cat->name);
    const auto sel = fuse_and_select(scored, cfg.alpha);
    auto rec = filter_correction(a.id, a.box, sel.best->mask, cfg, image.dims);
    rec.fused_score = sel.fused_score;
    rec.chosen_source = sel.best->source;
    rec.chosen_index = sel.best->index;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

CorrectionResult correct_dataset(const Dataset& d, MaskProvider& provider, const FmcConfig& cfg,
                                 const CorrectionOptions& options) {
  check_config(cfg);
  const std::size_t n_images = d.images.size();
  std::vector<std::vector<const Annotation*>> per_image(n_images);
  {
    std::map<std::int64_t, std::size_t> slot;
    for (std::size_t i = 0; i < n_images; ++i) slot.emplace(d.images[i].id, i);
    for (const auto& a : d.annotations) {
      const auto it = slot.find(a.image_id);
      if (it == slot.end() || d.find_category(a.category_id) == nullptr) {
        fail(ErrorCode::kDanglingReference, "annotation " + std::to_string(a.id));
      }
      per_image[it->second].push_back(&a);
    }
  }

  std::vector<std::vector<CorrectionRecord>> per_image_records(n_images);
  std::vector<char> failed(n_images, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_images) return;
      {
        std::lock_guard lock(fatal_mutex);
        if (fatal) return;
      }
      const auto& image = d.images[i];
      const auto& anns = per_image[i];
      if (anns.empty()) continue;
      const std::string ref = options.image_ref ? options.image_ref(image) : image.file_path;
      try {
        per_image_records[i] = correct_image(d, image, anns, provider, cfg, ref);
      } catch (const Error& e) {
        if (!is_provider_failure(e.code())) {
          std::lock_guard lock(fatal_mutex);
          if (!fatal) fatal = std::current_exception();
          return;
        }
        failed[i] = 1;
        auto& recs = per_image_records[i];
        recs.clear();
        for (const auto* a : anns) {
          CorrectionRecord rec;
          rec.annotation_id = a->id;
          rec.corrected_box = a->box;
          rec.reject_reason = RejectReason::kProviderError;
          rec.detail = e.what();
          recs.push_back(std::move(rec));
        }
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(n_images, 1))));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(work);
  }
  if (fatal) std::rethrow_exception(fatal);

  CorrectionResult result;
  result.dataset = d;
  std::map<std::int64_t, const CorrectionRecord*> by_id;
  for (const auto& recs : per_image_records) {
    for (const auto& r : recs) by_id.emplace(r.annotation_id, &r);
  }
  result.records.reserve(d.annotations.size());
  for (auto& a : result.dataset.annotations) {
    const auto* rec = by_id.at(a.id);
    a.box = rec->corrected_box;
    a.mask.reset();
    result.records.push_back(*rec);
  }
  for (char f : failed) result.failed_images += f;

  auto& prov = result.dataset.provenance;
  prov["stage"] = "corrected";
  prov["alpha"] = cfg.alpha;
  prov["lambda_iou"] = cfg.lambda_iou;
  prov["candidates_per_prompt"] = cfg.candidates_per_prompt;
  return result;
}

namespace {

nlohmann::ordered_json box_to_json(const Box& b) { return {b.cx, b.cy, b.w, b.h}; }

Box box_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) fail(ErrorCode::kSchemaError, "box must be [cx, cy, w, h]");
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::kSchemaError, "box entries must be numbers");
  }
  return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

nlohmann::ordered_json records_to_json(const std::vector<CorrectionRecord>& records) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["annotation_id"] = r.annotation_id;
    j["accepted"] = r.accepted;
    j["corrected_box"] = box_to_json(r.corrected_box);
    j["fused_score"] = r.fused_score;
    j["iou_noisy_corrected"] = r.iou_noisy_corrected;
    j["chosen_source"] = r.chosen_source ? nlohmann::ordered_json(to_string(*r.chosen_source)) : nlohmann::ordered_json(nullptr);
    j["chosen_index"] = r.chosen_index;
    j["reject_reason"] = r.reject_reason ? nlohmann::ordered_json(to_string(*r.reject_reason)) : nlohmann::ordered_json(nullptr);
    if (!r.detail.empty()) j["detail"] = r.detail;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<CorrectionRecord> records_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorCode::kSchemaError, "correction records must be an array");
  std::vector<CorrectionRecord> out;
  out.reserve(j.size());
  try {
    for (const auto& e : j) {
      CorrectionRecord r;
      r.annotation_id = e.at("annotation_id").get<std::int64_t>();
      r.accepted = e.at("accepted").get<bool>();
      r.corrected_box = box_from_json(e.at("corrected_box"));
      r.fused_score = e.value("fused_score", 0.0);
      r.iou_noisy_corrected = e.value("iou_noisy_corrected", 0.0);
      if (e.contains("chosen_source") && !e["chosen_source"].is_null()) {
        r.chosen_source = prompt_source_from_string(e["chosen_source"].get<std::string>());
      }
      r.chosen_index = e.value("chosen_index", -1);
      if (e.contains("reject_reason") && !e["reject_reason"].is_null()) {
        r.reject_reason = reject_reason_from_string(e["reject_reason"].get<std::string>());
      }
      r.detail = e.value("detail", std::string());
      if (!r.corrected_box.valid()) fail(ErrorCode::kInvalidBox, "record " + std::to_string(r.annotation_id));
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("correction record: ") + e.what());
  }
  return out;
}

}  // namespace boxmend
