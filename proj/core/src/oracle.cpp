/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "boxmend/error.hpp"
#include "boxmend/pcg32.hpp"

namespace boxmend {

namespace {

constexpr int kBackgroundBlobRadius = 4;

struct Rect {
  int c0, r0, c1, r1;  // inclusive-exclusive pixel ranges [c0, c1) x [r0, r1)
};

Rect pixel_rect(double x1, double y1, double x2, double y2, ImageDims dims) {
  const auto clampi = [](double v, int hi) { return std::clamp(static_cast<int>(std::floor(v)), 0, hi); };
  return Rect{clampi(x1, dims.width), clampi(y1, dims.height), clampi(std::ceil(x2), dims.width),
              clampi(std::ceil(y2), dims.height)};
}

// Pixels within `jitter` (Chebyshev distance to the nearest pixel of the other
// side) of the instance boundary flip with probability 1/2.
Mask jitter_mask(const Mask& truth, double jitter, Pcg32& rng) {
  if (jitter <= 0.0) return truth;
  const int reach = static_cast<int>(std::floor(jitter));
  if (reach < 1) return truth;
  const Box b = mask_to_box(truth);
  const ImageDims dims = truth.dims();
  const Rect area = pixel_rect(b.x1() - reach, b.y1() - reach, b.x2() + reach, b.y2() + reach, dims);
  Mask out = truth;
  for (int row = area.r0; row < area.r1; ++row) {
    for (int col = area.c0; col < area.c1; ++col) {
      const bool inside = truth.at(row, col);
      int nearest = reach + 1;
      for (int dr = -reach; dr <= reach && nearest > 1; ++dr) {
        for (int dc = -reach; dc <= reach; ++dc) {
          const int r = row + dr, c = col + dc;
          if (r < 0 || c < 0 || r >= dims.height || c >= dims.width) continue;
          if (truth.at(r, c) != inside) nearest = std::min(nearest, std::max(std::abs(dr), std::abs(dc)));
        }
      }
      if (nearest <= reach && (rng() & 1u)) out.set(row, col, !inside);
    }
  }
  return out;
}

Mask part_mask(const Mask& truth, Pcg32& rng) {
  const Box b = mask_to_box(truth);
  const bool split_x = rng() & 1u;
  const bool keep_low = rng() & 1u;
  Mask out = truth;
  for (int row = 0; row < truth.height(); ++row) {
    for (int col = 0; col < truth.width(); ++col) {
      if (!truth.at(row, col)) continue;
      const double pos = split_x ? col + 0.5 : row + 0.5;
      const double mid = split_x ? b.cx : b.cy;
      if ((pos < mid) != keep_low) out.set(row, col, false);
    }
  }
  return out.empty() ? truth : out;
}

Mask leak_mask(const OracleScene& scene, const Mask& truth, Pcg32& rng) {
  const Box b = mask_to_box(truth);
  const int side = static_cast<int>(rng.below(4));
  double x1 = b.x1(), y1 = b.y1(), x2 = b.x2(), y2 = b.y2();
  switch (side) {
    case 0: x2 = x1; x1 -= b.w / 2; break;
    case 1: x1 = x2; x2 += b.w / 2; break;
    case 2: y2 = y1; y1 -= b.h / 2; break;
    default: y1 = y2; y2 += b.h / 2; break;
  }
  const Rect r = pixel_rect(x1, y1, x2, y2, scene.dims());
  Mask out = truth;
  for (int row = r.r0; row < r.r1; ++row) {
    for (int col = r.c0; col < r.c1; ++col) {
      if (scene.instance_at(row, col) == 0) out.set(row, col);
    }
  }
  return out;
}

Mask background_blob(const OracleScene& scene, const Prompt& p) {
  const ImageDims dims = scene.dims();
  Mask out(dims.width, dims.height);
  double cx, cy;
  if (p.kind == PromptKind::kBox) {
    const Rect r = pixel_rect(p.box[0], p.box[1], p.box[2], p.box[3], dims);
    for (int row = r.r0; row < r.r1; ++row) {
      for (int col = r.c0; col < r.c1; ++col) {
        if (scene.instance_at(row, col) == 0) out.set(row, col);
      }
    }
    cx = (p.box[0] + p.box[2]) / 2;
    cy = (p.box[1] + p.box[3]) / 2;
  } else {
    cx = p.point.x;
    cy = p.point.y;
    const Rect r = pixel_rect(cx - kBackgroundBlobRadius, cy - kBackgroundBlobRadius, cx + kBackgroundBlobRadius,
                              cy + kBackgroundBlobRadius, dims);
    for (int row = r.r0; row < r.r1; ++row) {
      for (int col = r.c0; col < r.c1; ++col) {
        const double dx = col + 0.5 - cx, dy = row + 0.5 - cy;
        if (dx * dx + dy * dy <= kBackgroundBlobRadius * kBackgroundBlobRadius && scene.instance_at(row, col) == 0) {
          out.set(row, col);
        }
      }
    }
  }
  if (out.empty()) {
    out.set(std::clamp(static_cast<int>(std::floor(cy)), 0, dims.height - 1),
            std::clamp(static_cast<int>(std::floor(cx)), 0, dims.width - 1));
  }
  return out;
}

// Index of the targeted instance, or -1 for background.
int target_instance(const OracleScene& scene, const Prompt& p) {
  if (p.kind == PromptKind::kPoint) {
    const ImageDims d = scene.dims();
    const int col = std::clamp(static_cast<int>(std::floor(p.point.x)), 0, d.width - 1);
    const int row = std::clamp(static_cast<int>(std::floor(p.point.y)), 0, d.height - 1);
    return scene.instance_at(row, col) - 1;
  }
  const Box prompt = Box::from_corners(p.box[0], p.box[1], p.box[2], p.box[3]);
  int best = -1;
  double best_iou = 0.0;
  if (!prompt.valid()) return best;
  for (std::size_t k = 0; k < scene.instance_count(); ++k) {
    const double v = iou(prompt, scene.instance_box(k));
    if (v > best_iou) {
      best_iou = v;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace

void check_fidelity(const OracleFidelity& f) {
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!(f.boundary_jitter >= 0.0) || !std::isfinite(f.boundary_jitter)) fail(ErrorCode::kInvalidArgument, "boundary_jitter must be >= 0");
  if (!prob(f.part_mask_prob) || !prob(f.background_leak_prob)) fail(ErrorCode::kInvalidArgument, "fidelity probabilities must be in [0, 1]");
  if (f.candidates_per_prompt < 1) fail(ErrorCode::kInvalidArgument, "candidates_per_prompt must be >= 1");
}

OracleScene OracleScene::from_scene(const Scene& scene) {
  OracleScene o;
  o.image_id_ = scene.record.id;
  o.dims_ = scene.record.dims;
  o.instance_map_ = scene.instance_map;
  for (const auto& c : scene.categories) o.taxonomy_.push_back(c.name);
  for (const auto& a : scene.annotations) {
    const auto it = std::find_if(scene.categories.begin(), scene.categories.end(),
                                 [&a](const Category& c) { return c.id == a.category_id; });
    o.classes_.push_back(it == scene.categories.end() ? std::string() : it->name);
  }
  o.index_instances();
  return o;
}

OracleScene OracleScene::from_dataset(const Dataset& d, std::int64_t image_id) {
  const ImageRecord* im = d.find_image(image_id);
  if (im == nullptr) fail(ErrorCode::kDanglingReference, "oracle: no image " + std::to_string(image_id));
  OracleScene o;
  o.image_id_ = image_id;
  o.dims_ = im->dims;
  o.instance_map_.assign(static_cast<std::size_t>(im->dims.width) * static_cast<std::size_t>(im->dims.height), 0);
  for (const auto& c : d.categories) o.taxonomy_.push_back(c.name);
  std::int32_t k = 0;
  for (const Annotation* a : d.annotations_of(image_id)) {
    if (!a->mask || a->mask->dims() != im->dims) {
      fail(ErrorCode::kInvalidArgument, "oracle needs an instance mask for annotation " + std::to_string(a->id));
    }
    ++k;
    const auto& data = a->mask->data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i]) o.instance_map_[i] = k;
    }
    const Category* c = d.find_category(a->category_id);
    o.classes_.push_back(c ? c->name : std::string());
  }
  o.index_instances();
  return o;
}

void OracleScene::index_instances() {
  instances_.assign(classes_.size(), Mask(dims_.width, dims_.height));
  for (int row = 0; row < dims_.height; ++row) {
    for (int col = 0; col < dims_.width; ++col) {
      const auto id = instance_at(row, col);
      if (id > 0) instances_[static_cast<std::size_t>(id - 1)].set(row, col);
    }
  }
  boxes_.clear();
  for (const auto& m : instances_) {
    // Fully overwritten instances keep a zero-area box and are never targeted.
    boxes_.push_back(m.empty() ? Box{0, 0, 0, 0} : mask_to_box(m));
  }
}

std::int32_t OracleScene::instance_at(int row, int col) const {
  return instance_map_[static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) + static_cast<std::size_t>(col)];
}

bool OracleScene::knows_class(std::string_view name) const {
  return std::find(taxonomy_.begin(), taxonomy_.end(), name) != taxonomy_.end();
}

std::vector<std::vector<ScoredMask>> oracle_segment(const OracleScene& scene, std::span<const Prompt> prompts,
                                                    const OracleFidelity& fidelity) {
  check_fidelity(fidelity);
  const auto k_count = static_cast<std::size_t>(fidelity.candidates_per_prompt);
  std::vector<std::vector<ScoredMask>> out;
  out.reserve(prompts.size());
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const Prompt& prompt = prompts[p];
    std::vector<ScoredMask> cands;
    const int target = target_instance(scene, prompt);
    if (target < 0) {
      const Mask blob = background_blob(scene, prompt);
      cands.assign(k_count, ScoredMask{blob, 0.0});
      out.push_back(std::move(cands));
      continue;
    }
    const Mask& truth = scene.instance_mask(static_cast<std::size_t>(target));
    const auto kind = static_cast<std::uint64_t>(prompt.kind);
    Pcg32 rng(mix64(mix64(fidelity.seed, static_cast<std::uint64_t>(scene.image_id())), static_cast<std::uint64_t>(target)),
              (static_cast<std::uint64_t>(p) << 1u) | kind);
    for (std::size_t k = 0; k < k_count; ++k) {
      Mask m;
      const double u = rng.next_unit();
      if (k > 0 && u < fidelity.part_mask_prob) {
        m = part_mask(truth, rng);
      } else if (k > 0 && u < fidelity.part_mask_prob + fidelity.background_leak_prob) {
        m = leak_mask(scene, truth, rng);
      } else {
        m = jitter_mask(truth, fidelity.boundary_jitter, rng);
      }
      const double score = mask_iou(m, truth);
      cands.push_back(ScoredMask{std::move(m), score});
    }
    out.push_back(std::move(cands));
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) fail(ErrorCode::kInvalidArgument, "softmax temperature must be > 0");
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - top) / temperature);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<double> oracle_label_score(const OracleScene& scene, std::span<const Mask> masks, std::string_view class_name,
                                       double temperature) {
  if (!scene.knows_class(class_name)) fail(ErrorCode::kUnknownClass, "class \"" + std::string(class_name) + "\" not in taxonomy");
  std::vector<double> affinity;
  affinity.reserve(masks.size());
  for (const auto& m : masks) {
    if (m.dims() != scene.dims()) fail(ErrorCode::kInvalidArgument, "mask size differs from image size");
    std::size_t on = 0, hit = 0;
    for (int row = 0; row < m.height(); ++row) {
      for (int col = 0; col < m.width(); ++col) {
        if (!m.at(row, col)) continue;
        ++on;
        const auto id = scene.instance_at(row, col);
        if (id > 0 && scene.instance_class(static_cast<std::size_t>(id - 1)) == class_name) ++hit;
      }
    }
    affinity.push_back(on == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(on));
  }
  return softmax(affinity, temperature);
}

}  // namespace boxmend
