/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/noise.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "boxmend/error.hpp"

namespace boxmend {

namespace {

void check_level(double level) {
  if (!(level >= 0.0 && level <= 1.0)) {
    fail(ErrorCode::kLevelOutOfRange, "noise level " + std::to_string(level) + " outside [0, 1]");
  }
}

}  // namespace

NoiseSample sample_noise(Pcg32& rng, double level) {
  check_level(level);
  auto draw = [&rng, level] { return level * (2.0 * rng.next_unit() - 1.0); };
  NoiseSample n;
  n.dx = draw();
  n.dy = draw();
  n.dw = draw();
  n.dh = draw();
  return n;
}

Box perturb_box(const Box& b, const NoiseSample& n, ImageDims dims) {
  Box out{b.cx + n.dx * b.w, b.cy + n.dy * b.h, b.w * (1.0 + n.dw), b.h * (1.0 + n.dh)};
  // dw == -1 collapses the side; clip_box restores the one-pixel floor around the center.
  out.w = std::max(out.w, 0.0);
  out.h = std::max(out.h, 0.0);
  return clip_box(out, dims);
}

Pcg32 annotation_rng(std::uint64_t seed, std::int64_t annotation_id) {
  return Pcg32(seed, static_cast<std::uint64_t>(annotation_id));
}

Dataset inject(const Dataset& d, const NoiseConfig& cfg) {
  check_level(cfg.level);
  std::unordered_map<std::int64_t, ImageDims> dims;
  for (const auto& im : d.images) dims.emplace(im.id, im.dims);
  Dataset out = d;
  for (auto& a : out.annotations) {
    const auto im = dims.find(a.image_id);
    if (im == dims.end()) fail(ErrorCode::kDanglingReference, "annotation " + std::to_string(a.id) + " has no image");
    Pcg32 rng = annotation_rng(cfg.seed, a.id);
    a.box = perturb_box(a.box, sample_noise(rng, cfg.level), im->second);
    a.mask.reset();
  }
  out.provenance["seed"] = cfg.seed;
  out.provenance["noise_level"] = cfg.level;
  out.provenance["stage"] = "noisy";
  return out;
}

}  // namespace boxmend
