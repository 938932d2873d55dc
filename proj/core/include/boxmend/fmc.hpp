/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxmend/dataset.hpp"
#include "boxmend/provider.hpp"

namespace boxmend {

struct FmcConfig {
  double alpha = 0.5;       // weight of the label score in the fused score
  double lambda_iou = 0.05; // minimum IoU(noisy, corrected) to accept
  int candidates_per_prompt = 3;
};

void check_config(const FmcConfig& cfg);

enum class PromptSource { kBox, kPoint };  // box-prompt candidates order first

std::string_view to_string(PromptSource s);
PromptSource prompt_source_from_string(std::string_view s);

struct Candidate {
  Mask mask;
  double sam_score = 0.0;
  std::optional<double> clip_score;
  PromptSource source = PromptSource::kBox;
  int index = 0;
};

struct CandidateSet {
  std::size_t object_index = 0;
  std::vector<Candidate> candidates;
  int dropped_empty = 0;
};

enum class RejectReason { kLowIou, kEmptyMask, kProviderError };

std::string_view to_string(RejectReason r);
RejectReason reject_reason_from_string(std::string_view s);

struct CorrectionRecord {
  std::int64_t annotation_id = 0;
  bool accepted = false;
  Box corrected_box;
  double fused_score = 0.0;
  double iou_noisy_corrected = 0.0;
  std::optional<PromptSource> chosen_source;
  int chosen_index = -1;
  std::optional<RejectReason> reject_reason;
  std::string detail;

  friend bool operator==(const CorrectionRecord&, const CorrectionRecord&) = default;
};

struct PromptSets {
  std::vector<Prompt> boxes;
  std::vector<Prompt> points;
};

PromptSets build_prompts(const std::vector<Box>& boxes);

/// Issues exactly two segment requests (all box prompts, then all point
/// prompts). Per object, box-prompt candidates precede point-prompt ones.
/// All-zero masks are dropped and counted.
std::vector<CandidateSet> gather_candidates(MaskProvider& provider, const std::string& image_ref,
                                            const std::vector<Box>& boxes, const FmcConfig& cfg);

/// One score request over all candidates of the set.
CandidateSet score_candidates(MaskProvider& provider, const std::string& image_ref, CandidateSet cs,
                              const std::string& class_name);

struct Selection {
  const Candidate* best = nullptr;
  double fused_score = 0.0;
};

/// fused = alpha * clip + (1 - alpha) * sam; ties go to the lowest
/// (source, index). Throws EmptyCandidateSet, InvalidArgument if a candidate
/// lacks a clip score.
Selection fuse_and_select(const CandidateSet& cs, double alpha);

/// Accepts mask_to_box(best_mask) iff its IoU with the noisy box (clipped to
/// `dims`) reaches cfg.lambda_iou. Otherwise the noisy box is kept.
CorrectionRecord filter_correction(std::int64_t annotation_id, const Box& noisy, const Mask& best_mask,
                                   const FmcConfig& cfg, ImageDims dims);

struct CorrectionResult {
  Dataset dataset;
  std::vector<CorrectionRecord> records;  // dataset annotation order
  int failed_images = 0;
};

struct CorrectionOptions {
  int jobs = 1;
  /// Maps an image record to the image_ref sent to the provider.
  std::function<std::string(const ImageRecord&)> image_ref;
};

CorrectionResult correct_dataset(const Dataset& d, MaskProvider& provider, const FmcConfig& cfg,
                                 const CorrectionOptions& options = {});

nlohmann::ordered_json records_to_json(const std::vector<CorrectionRecord>& records);
std::vector<CorrectionRecord> records_from_json(const nlohmann::json& j);

}  // namespace boxmend
