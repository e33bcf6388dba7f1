#include "detfuse/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "detfuse/rng.hpp"

namespace detfuse {

namespace {

constexpr double kMinEdge = 1e-4;

double clamp_score(double s) { return std::clamp(s, 1e-6, 1.0); }

// Clip to [0,1], swap inverted edges, expand degenerate ones.
void repair_interval(double& lo, double& hi) {
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  if (lo > hi) std::swap(lo, hi);
  if (hi - lo < kMinEdge) {
    hi = lo + kMinEdge;
    if (hi > 1.0) {
      hi = 1.0;
      lo = 1.0 - kMinEdge;
    }
  }
}

BoundingBox jittered_box(const BoundingBox& b, double sigma, Rng& rng) {
  BoundingBox out;
  out.x1 = b.x1 + rng.normal(0.0, sigma);
  out.y1 = b.y1 + rng.normal(0.0, sigma);
  out.x2 = b.x2 + rng.normal(0.0, sigma);
  out.y2 = b.y2 + rng.normal(0.0, sigma);
  if (sigma == 0.0) return b;
  repair_interval(out.x1, out.x2);
  repair_interval(out.y1, out.y2);
  return out;
}

BoundingBox random_box(Rng& rng) {
  const double w = rng.uniform(0.05, 0.35);
  const double h = rng.uniform(0.05, 0.35);
  const double x1 = rng.uniform(0.0, 1.0 - w);
  const double y1 = rng.uniform(0.0, 1.0 - h);
  return BoundingBox{x1, y1, x1 + w, y1 + h};
}

}  // namespace

std::vector<GroundTruthBox> generate_ground_truth(const GtGenSpec& spec) {
  std::vector<GroundTruthBox> gt;
  for (int i = 0; i < spec.num_images; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "img%04d", i);
    Rng rng(mix_seed(spec.seed, hash_str(name)));
    const int count =
        spec.min_boxes_per_image +
        static_cast<int>(rng.uniform() *
                         (spec.max_boxes_per_image - spec.min_boxes_per_image + 1));
    for (int k = 0; k < count; ++k) {
      GroundTruthBox g;
      g.image_id = name;
      g.class_id = static_cast<int>(rng.uniform() * spec.num_classes);
      g.class_id = std::min(g.class_id, spec.num_classes - 1);
      g.box = random_box(rng);
      gt.push_back(std::move(g));
    }
  }
  return gt;
}

std::vector<Detection> simulate_detectors(
    const std::vector<GroundTruthBox>& ground_truth, const SimSpec& spec) {
  // Image order as first seen in the GT list; boxes keep file order.
  std::vector<std::string> images;
  std::map<std::string, std::vector<const GroundTruthBox*>> by_image;
  for (const auto& g : ground_truth) {
    auto [it, inserted] = by_image.try_emplace(g.image_id);
    if (inserted) images.push_back(g.image_id);
    it->second.push_back(&g);
  }

  std::vector<Detection> out;
  for (std::size_t mi = 0; mi < spec.models.size(); ++mi) {
    const auto& m = spec.models[mi];
    for (const auto& image : images) {
      Rng rng(mix_seed(mix_seed(spec.seed, mi), hash_str(image)));
      for (const auto* g : by_image[image]) {
        if (rng.uniform() >= m.detect_prob) continue;
        Detection d;
        d.image_id = image;
        d.model_id = m.model_id;
        d.class_id = g->class_id;
        d.box = jittered_box(g->box, m.jitter_sigma, rng);
        d.score = clamp_score(rng.normal(m.tp_score_mean, m.tp_score_spread));
        out.push_back(std::move(d));
      }
      const int fps = rng.poisson(m.fp_rate);
      for (int k = 0; k < fps; ++k) {
        Detection d;
        d.image_id = image;
        d.model_id = m.model_id;
        d.class_id = std::min(static_cast<int>(rng.uniform() * spec.num_classes),
                              spec.num_classes - 1);
        d.box = random_box(rng);
        d.score = clamp_score(rng.normal(m.fp_score_mean, m.fp_score_spread));
        out.push_back(std::move(d));
      }
    }
  }
  return out;
}

}  // namespace detfuse
