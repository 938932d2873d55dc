/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <benchmark/benchmark.h>

#include <vector>

#include "boxmend/evaluation.hpp"
#include "boxmend/fmc.hpp"
#include "boxmend/interpolation.hpp"
#include "boxmend/noise.hpp"
#include "boxmend/provider.hpp"
#include "boxmend/synth.hpp"

namespace boxmend {
namespace {

Dataset scenes(int count) {
  SceneSpec spec;
  spec.seed = 11;
  return scenes_to_dataset(generate_scenes(spec, count));
}

void BM_Iou(benchmark::State& state) {
  Pcg32 rng(1, 1);
  std::vector<Box> boxes;
  for (int i = 0; i < 1024; ++i) boxes.push_back(Box{rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(1, 50), rng.uniform(1, 50)});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[i & 1023], boxes[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_RleRoundTrip(benchmark::State& state) {
  const Dataset d = scenes(1);
  const Mask& m = *d.annotations.front().mask;
  for (auto _ : state) benchmark::DoNotOptimize(rle_decode(rle_encode(m)));
}
BENCHMARK(BM_RleRoundTrip);

void BM_OracleSegment(benchmark::State& state) {
  const Dataset d = scenes(1);
  const OracleScene scene = OracleScene::from_dataset(d, d.images.front().id);
  const auto prompts = build_prompts({d.annotations.front().box}).boxes;
  OracleFidelity f;
  f.boundary_jitter = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(oracle_segment(scene, prompts, f));
}
BENCHMARK(BM_OracleSegment)->Arg(0)->Arg(2);

void BM_CorrectDataset(benchmark::State& state) {
  const Dataset truth = scenes(static_cast<int>(state.range(0)));
  const Dataset noisy = inject(truth, NoiseConfig{0.4, 3});
  OracleProvider oracle(truth, OracleFidelity{});
  for (auto _ : state) benchmark::DoNotOptimize(correct_dataset(noisy, oracle, FmcConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(noisy.annotations.size()));
}
BENCHMARK(BM_CorrectDataset)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MlpForward(benchmark::State& state) {
  Pcg32 rng(2, 2);
  std::vector<double> flat(MlpParams::zeros().parameter_count());
  for (auto& v : flat) v = rng.uniform(-0.1, 0.1);
  const MlpParams p = MlpParams::unflatten(flat);
  const auto f = box_pair_features(Box{40, 40, 20, 30}, Box{44, 38, 25, 28}, ImageDims{128, 128});
  for (auto _ : state) benchmark::DoNotOptimize(mlp_forward(p, f));
}
BENCHMARK(BM_MlpForward);

void BM_AveragePrecision(benchmark::State& state) {
  Pcg32 rng(3, 3);
  std::vector<bool> flags(static_cast<std::size_t>(state.range(0)));
  std::size_t tps = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    flags[i] = rng() & 1u;
    tps += flags[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(average_precision(flags, tps + 10));
}
BENCHMARK(BM_AveragePrecision)->Arg(100)->Arg(10000);

}  // namespace
}  // namespace boxmend

BENCHMARK_MAIN();
