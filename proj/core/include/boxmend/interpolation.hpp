/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxmend/dataset.hpp"
#include "boxmend/fmc.hpp"

namespace boxmend {

inline constexpr std::size_t kFeatureCount = 12;
inline constexpr std::size_t kHiddenWidth = 32;

/// Geometric description of a (corrected, noisy) box pair:
///   [0..3]  corners of b_hat / (W, H, W, H)
///   [4..7]  corners of b / (W, H, W, H)
///   [8]     iou(b_hat, b)
///   [9]     center distance / image diagonal
///   [10]    ln(w_hat / w)
///   [11]    ln(h_hat / h)
using BoxPairFeatures = std::array<double, kFeatureCount>;

BoxPairFeatures box_pair_features(const Box& b_hat, const Box& b, ImageDims dims);

/// Grid search over gamma in {0, 0.01, ..., 1} maximizing
/// iou(interpolate_boxes(b_hat, b, gamma), b_true); ties go to the smallest gamma.
double gamma_oracle(const Box& b_hat, const Box& b, const Box& b_true);

/// 12 -> 32 -> 32 -> 1 perceptron, ReLU hidden units, sigmoid output.
/// Weights are row-major [out][in].
struct MlpParams {
  std::vector<double> w1, b1;  // 32x12, 32
  std::vector<double> w2, b2;  // 32x32, 32
  std::vector<double> w3, b3;  // 1x32, 1

  static MlpParams zeros();
  std::size_t parameter_count() const;
  /// Flat view in the order w1, b1, w2, b2, w3, b3.
  std::vector<double> flatten() const;
  static MlpParams unflatten(std::span<const double> flat);
  void check() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Output lies strictly inside (0, 1). Throws NonFiniteInput.
double mlp_forward(const MlpParams& params, const BoxPairFeatures& f);

struct TrainingPair {
  BoxPairFeatures features;
  double target = 0.0;
};

/// Gradient of mean((mlp_forward(f) - target)^2) over the batch.
/// Throws InvalidArgument on an empty batch.
MlpParams mlp_grad(const MlpParams& params, std::span<const TrainingPair> batch);
double mlp_loss(const MlpParams& params, std::span<const TrainingPair> batch);

struct TrainOptions {
  std::uint64_t seed = 0;
  int epochs = 500;
  double step = 0.01;
  double init_range = 0.1;
};

inline constexpr std::size_t kMinTrainingPairs = 100;

struct TrainResult {
  MlpParams params;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

/// Full-batch gradient descent from Uniform(-r, r) weights. The output bias
/// starts at logit(mean target). Throws InsufficientData below 100 pairs.
TrainResult mlp_train(std::span<const TrainingPair> pairs, const TrainOptions& options = {});

nlohmann::ordered_json mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const nlohmann::json& j);

/// Training pairs from (corrected, noisy, truth) datasets aligned by
/// annotation id. Pairs whose boxes coincide carry no signal and are skipped.
std::vector<TrainingPair> make_training_pairs(const Dataset& corrected, const Dataset& noisy, const Dataset& truth);

struct MixingPolicy {
  enum class Kind { kConstant, kHeuristic, kLearned };

  Kind kind = Kind::kConstant;
  double constant = 0.0;
  std::optional<MlpParams> params;

  static MixingPolicy constant_gamma(double gamma);
  static MixingPolicy heuristic();
  static MixingPolicy learned(MlpParams params);

  /// "constant:0.5", "heuristic" or "learned".
  std::string describe() const;

  /// gamma in [0, 1]. The heuristic policy reads the record's fused score.
  double gamma(const Box& b_hat, const Box& b, ImageDims dims, const CorrectionRecord* record) const;
};

/// b* = gamma * b_hat + (1 - gamma) * b per annotation id. The result keeps the
/// noisy dataset's layout and records the policy and every gamma in its
/// provenance. Throws CorrespondenceError when id sets differ.
Dataset apply_interpolation(const Dataset& corrected, const Dataset& noisy,
                            const std::vector<CorrectionRecord>& records, const MixingPolicy& policy);

}  // namespace boxmend
