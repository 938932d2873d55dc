/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "boxmend/error.hpp"
#include "boxmend/interpolation.hpp"
#include "boxmend/pcg32.hpp"

namespace boxmend {

namespace {

constexpr std::size_t kIn = kFeatureCount;
constexpr std::size_t kH = kHiddenWidth;

struct LayerShape {
  std::size_t out, in;
};
constexpr LayerShape kShapes[3] = {{kH, kIn}, {kH, kH}, {1, kH}};

double sigmoid(double z) {
  const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(s, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

struct Activations {
  std::array<double, kH> z1, a1, z2, a2;
  double z3 = 0.0;
  double out = 0.0;
};

void forward(const MlpParams& p, const BoxPairFeatures& f, Activations& act) {
  for (std::size_t o = 0; o < kH; ++o) {
    double z = p.b1[o];
    for (std::size_t i = 0; i < kIn; ++i) z += p.w1[o * kIn + i] * f[i];
    act.z1[o] = z;
    act.a1[o] = z > 0.0 ? z : 0.0;
  }
  for (std::size_t o = 0; o < kH; ++o) {
    double z = p.b2[o];
    for (std::size_t i = 0; i < kH; ++i) z += p.w2[o * kH + i] * act.a1[i];
    act.z2[o] = z;
    act.a2[o] = z > 0.0 ? z : 0.0;
  }
  double z = p.b3[0];
  for (std::size_t i = 0; i < kH; ++i) z += p.w3[i] * act.a2[i];
  act.z3 = z;
  act.out = sigmoid(z);
}

void check_features(const BoxPairFeatures& f) {
  for (double v : f) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "feature vector has a non-finite entry");
  }
}

}  // namespace

MlpParams MlpParams::zeros() {
  MlpParams p;
  p.w1.assign(kH * kIn, 0.0);
  p.b1.assign(kH, 0.0);
  p.w2.assign(kH * kH, 0.0);
  p.b2.assign(kH, 0.0);
  p.w3.assign(kH, 0.0);
  p.b3.assign(1, 0.0);
  return p;
}

std::size_t MlpParams::parameter_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto* v : {&w1, &b1, &w2, &b2, &w3, &b3}) flat.insert(flat.end(), v->begin(), v->end());
  return flat;
}

MlpParams MlpParams::unflatten(std::span<const double> flat) {
  MlpParams p = zeros();
  if (flat.size() != p.parameter_count()) {
    fail(ErrorCode::kInvalidArgument, "expected " + std::to_string(p.parameter_count()) + " parameters, got " +
                                          std::to_string(flat.size()));
  }
  std::size_t at = 0;
  for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3}) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), v->size(), v->begin());
    at += v->size();
  }
  return p;
}

void MlpParams::check() const {
  const std::pair<const std::vector<double>*, std::size_t> expected[] = {
      {&w1, kH * kIn}, {&b1, kH}, {&w2, kH * kH}, {&b2, kH}, {&w3, kH}, {&b3, 1},
  };
  for (const auto& [v, n] : expected) {
    if (v->size() != n) fail(ErrorCode::kSchemaError, "MLP parameter block has the wrong size");
    for (double x : *v) {
      if (!std::isfinite(x)) fail(ErrorCode::kNonFiniteInput, "MLP parameters must be finite");
    }
  }
}

double mlp_forward(const MlpParams& params, const BoxPairFeatures& f) {
  check_features(f);
  params.check();
  Activations act;
  forward(params, f, act);
  return act.out;
}

double mlp_loss(const MlpParams& params, std::span<const TrainingPair> batch) {
  if (batch.empty()) fail(ErrorCode::kInvalidArgument, "empty batch");
  params.check();
  Activations act;
  double sum = 0.0;
  for (const auto& s : batch) {
    check_features(s.features);
    forward(params, s.features, act);
    const double e = act.out - s.target;
    sum += e * e;
  }
  return sum / static_cast<double>(batch.size());
}

MlpParams mlp_grad(const MlpParams& params, std::span<const TrainingPair> batch) {
  if (batch.empty()) fail(ErrorCode::kInvalidArgument, "empty batch");
  params.check();
  MlpParams g = MlpParams::zeros();
  const double scale = 2.0 / static_cast<double>(batch.size());
  Activations act;
  std::array<double, kH> d2{}, d1{};
  for (const auto& s : batch) {
    check_features(s.features);
    forward(params, s.features, act);
    const double d3 = scale * (act.out - s.target) * act.out * (1.0 - act.out);
    g.b3[0] += d3;
    for (std::size_t i = 0; i < kH; ++i) {
      g.w3[i] += d3 * act.a2[i];
      d2[i] = act.z2[i] > 0.0 ? d3 * params.w3[i] : 0.0;
    }
    for (std::size_t o = 0; o < kH; ++o) {
      g.b2[o] += d2[o];
      for (std::size_t i = 0; i < kH; ++i) g.w2[o * kH + i] += d2[o] * act.a1[i];
    }
    for (std::size_t i = 0; i < kH; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < kH; ++o) acc += params.w2[o * kH + i] * d2[o];
      d1[i] = act.z1[i] > 0.0 ? acc : 0.0;
    }
    for (std::size_t o = 0; o < kH; ++o) {
      g.b1[o] += d1[o];
      for (std::size_t i = 0; i < kIn; ++i) g.w1[o * kIn + i] += d1[o] * s.features[i];
    }
  }
  return g;
}

TrainResult mlp_train(std::span<const TrainingPair> pairs, const TrainOptions& options) {
  if (pairs.size() < kMinTrainingPairs) {
    fail(ErrorCode::kInsufficientData, "need at least " + std::to_string(kMinTrainingPairs) +
                                           " training pairs, got " + std::to_string(pairs.size()));
  }
  if (options.epochs < 0 || !(options.step > 0.0)) fail(ErrorCode::kInvalidArgument, "bad training options");

  Pcg32 rng(options.seed, 0x3a7);
  MlpParams p = MlpParams::zeros();
  for (auto* w : {&p.w1, &p.w2, &p.w3}) {
    for (double& x : *w) x = rng.uniform(-options.init_range, options.init_range);
  }
  double mean_target = 0.0;
  for (const auto& s : pairs) mean_target += s.target;
  mean_target = std::clamp(mean_target / static_cast<double>(pairs.size()), 1e-3, 1.0 - 1e-3);
  p.b3[0] = std::log(mean_target / (1.0 - mean_target));

  TrainResult result;
  result.initial_loss = mlp_loss(p, pairs);
  auto flat = p.flatten();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto g = mlp_grad(p, pairs).flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= options.step * g[i];
    p = MlpParams::unflatten(flat);
  }
  result.final_loss = mlp_loss(p, pairs);
  result.params = std::move(p);
  return result;
}

nlohmann::ordered_json mlp_to_json(const MlpParams& params) {
  params.check();
  nlohmann::ordered_json j;
  j["architecture"] = "mlp";
  j["hidden_activation"] = "relu";
  j["output_activation"] = "sigmoid";
  const std::pair<const std::vector<double>*, const std::vector<double>*> blocks[] = {
      {&params.w1, &params.b1}, {&params.w2, &params.b2}, {&params.w3, &params.b3}};
  auto layers = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < 3; ++l) {
    nlohmann::ordered_json layer;
    layer["shape"] = {kShapes[l].out, kShapes[l].in};
    layer["weights"] = *blocks[l].first;
    layer["bias"] = *blocks[l].second;
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j;
}

MlpParams mlp_from_json(const nlohmann::json& j) {
  MlpParams p = MlpParams::zeros();
  try {
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != 3) fail(ErrorCode::kSchemaError, "MLP must have 3 layers");
    const std::pair<std::vector<double>*, std::vector<double>*> blocks[] = {
        {&p.w1, &p.b1}, {&p.w2, &p.b2}, {&p.w3, &p.b3}};
    for (std::size_t l = 0; l < 3; ++l) {
      const auto& layer = layers[l];
      const auto shape = layer.at("shape").get<std::vector<std::size_t>>();
      if (shape != std::vector<std::size_t>{kShapes[l].out, kShapes[l].in}) {
        fail(ErrorCode::kSchemaError, "layer " + std::to_string(l) + " has an unexpected shape");
      }
      auto w = layer.at("weights").get<std::vector<double>>();
      auto b = layer.at("bias").get<std::vector<double>>();
      if (w.size() != blocks[l].first->size() || b.size() != blocks[l].second->size()) {
        fail(ErrorCode::kSchemaError, "layer " + std::to_string(l) + " does not match its declared shape");
      }
      *blocks[l].first = std::move(w);
      *blocks[l].second = std::move(b);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("MLP parameters: ") + e.what());
  }
  p.check();
  return p;
}

}  // namespace boxmend
