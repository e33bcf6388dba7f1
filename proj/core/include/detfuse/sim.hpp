#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detfuse/detection.hpp"
#include "detfuse/eval.hpp"

namespace detfuse {

/// Behavior knobs for one synthetic detector.
struct SimModelParams {
  std::string model_id;
  double detect_prob = 0.9;     // chance of emitting a box per GT object
  double jitter_sigma = 0.02;   // coordinate noise, normalized units
  double tp_score_mean = 0.8;
  double tp_score_spread = 0.1;
  double fp_rate = 0.5;         // Poisson mean of false positives per image
  double fp_score_mean = 0.3;
  double fp_score_spread = 0.1;
};

struct SimSpec {
  std::vector<SimModelParams> models;
  std::uint64_t seed = 0;
  int num_classes = 3;
};

/// Parameters for a synthetic ground-truth set.
struct GtGenSpec {
  int num_images = 100;
  int min_boxes_per_image = 1;
  int max_boxes_per_image = 3;
  int num_classes = 3;
  std::uint64_t seed = 0;
};

/// Random valid boxes over `num_images` images named img0000..; fully
/// determined by the seed.
std::vector<GroundTruthBox> generate_ground_truth(const GtGenSpec& spec);

/// Stands in for real detector outputs. For each GT box and model, a true
/// positive is emitted with probability detect_prob: coordinates perturbed
/// by Gaussian jitter and repaired (clip to [0,1], swap/expand degenerate
/// edges), score drawn from the TP distribution. Each model additionally
/// emits Poisson(fp_rate) false positives per image with random boxes,
/// classes, and FP-distributed scores. The RNG stream is derived per
/// (seed, model, image), so output is reproducible bit for bit.
std::vector<Detection> simulate_detectors(
    const std::vector<GroundTruthBox>& ground_truth, const SimSpec& spec);

}  // namespace detfuse
