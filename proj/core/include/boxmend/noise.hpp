/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>

#include "boxmend/dataset.hpp"
#include "boxmend/pcg32.hpp"

namespace boxmend {

/// Relative offsets; each component lies in [-level, level].
struct NoiseSample {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;

  friend bool operator==(const NoiseSample&, const NoiseSample&) = default;
};

struct NoiseConfig {
  double level = 0.0;
  std::uint64_t seed = 0;
};

/// Four i.i.d. Uniform(-level, level) draws (dx, dy, dw, dh), each consuming
/// one 64-bit draw (two PCG32 outputs). Throws LevelOutOfRange.
NoiseSample sample_noise(Pcg32& rng, double level);

/// cx += dx*w, cy += dy*h, w *= 1+dw, h *= 1+dh, then clip_box.
Box perturb_box(const Box& b, const NoiseSample& n, ImageDims dims);

/// Generator for one annotation: seed = cfg.seed, stream = annotation id.
Pcg32 annotation_rng(std::uint64_t seed, std::int64_t annotation_id);

/// Perturbs every box independently, drops masks, keeps labels, and records
/// seed/level/stage in provenance. Throws LevelOutOfRange.
Dataset inject(const Dataset& d, const NoiseConfig& cfg);

}  // namespace boxmend
