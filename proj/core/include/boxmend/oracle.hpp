/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxmend/dataset.hpp"
#include "boxmend/protocol.hpp"
#include "boxmend/synth.hpp"

namespace boxmend {

/// Failure modes the oracle segmenter injects. Zero jitter and zero
/// probabilities give a perfect segmenter.
struct OracleFidelity {
  double boundary_jitter = 0.0;       // pixels within this distance of the boundary flip with p = 1/2
  double part_mask_prob = 0.0;        // extra candidate is half of the instance
  double background_leak_prob = 0.0;  // extra candidate spills into adjacent background
  int candidates_per_prompt = 3;
  std::uint64_t seed = 0;
};

void check_fidelity(const OracleFidelity& f);

/// Ground truth the oracle consults: the instance map of one image plus the
/// dataset taxonomy. Never looks at image pixels.
class OracleScene {
 public:
  static OracleScene from_scene(const Scene& scene);
  /// Requires every annotation of the image to carry a mask.
  static OracleScene from_dataset(const Dataset& d, std::int64_t image_id);

  std::int64_t image_id() const { return image_id_; }
  ImageDims dims() const { return dims_; }
  std::size_t instance_count() const { return instances_.size(); }
  /// 0 = background, k = instance k-1.
  std::int32_t instance_at(int row, int col) const;
  const Mask& instance_mask(std::size_t k) const { return instances_[k]; }
  const Box& instance_box(std::size_t k) const { return boxes_[k]; }
  const std::string& instance_class(std::size_t k) const { return classes_[k]; }
  bool knows_class(std::string_view name) const;

 private:
  void index_instances();

  std::int64_t image_id_ = 0;
  ImageDims dims_;
  std::vector<std::int32_t> instance_map_;
  std::vector<Mask> instances_;
  std::vector<Box> boxes_;
  std::vector<std::string> classes_;
  std::vector<std::string> taxonomy_;
};

/// Stand-in segmenter. Per prompt, K candidates: the targeted instance
/// (point: containing instance; box: max-IoU instance), then variants per
/// fidelity. Score = IoU with the targeted instance; background prompts yield
/// background blobs scoring 0.
std::vector<std::vector<ScoredMask>> oracle_segment(const OracleScene& scene, std::span<const Prompt> prompts,
                                                    const OracleFidelity& fidelity);

inline constexpr double kDefaultLabelTemperature = 0.1;

/// Stand-in label scorer: affinity = fraction of a mask's pixels lying on an
/// instance of `class_name`; returns softmax(affinity / temperature).
/// Throws UnknownClass.
std::vector<double> oracle_label_score(const OracleScene& scene, std::span<const Mask> masks, std::string_view class_name,
                                       double temperature = kDefaultLabelTemperature);

/// Numerically stable softmax of `logits / temperature`.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

}  // namespace boxmend
