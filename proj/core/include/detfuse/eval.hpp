#pragma once

#include <map>
#include <string>
#include <vector>

#include "detfuse/detection.hpp"

namespace detfuse {

/// Annotated box without a score.
struct GroundTruthBox {
  std::string image_id;
  int class_id = 0;
  BoundingBox box;
};

enum class Interpolation { all_point, eleven_point };

const char* to_string(Interpolation i);
Interpolation interpolation_from_string(const std::string& s);

struct EvalConfig {
  double iou_threshold = 0.5;
  Interpolation interpolation = Interpolation::all_point;
};

struct ClassResult {
  double ap = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int num_gt = 0;
};

struct EvalReport {
  std::map<int, ClassResult> per_class;
  double map = 0.0;  // mean over classes with >= 1 ground-truth box
};

/// VOC-style greedy matching for one class. Detections must be sorted by
/// descending score; each is assigned (in order, per image) to the unmatched
/// ground-truth box of highest IoU >= threshold. Returns one TP/FP flag per
/// detection, in the given order.
std::vector<bool> match_detections(const std::vector<Detection>& detections,
                                   const std::vector<GroundTruthBox>& gt,
                                   double iou_threshold);

/// Area under the precision-recall curve from an ordered TP/FP sequence.
/// all_point integrates the precision envelope exactly; eleven_point averages
/// interpolated precision at recalls {0, 0.1, ..., 1.0}.
/// num_gt == 0 follows the convention: 1.0 with no detections, else 0.0.
double average_precision(const std::vector<bool>& labels, int num_gt,
                         Interpolation interpolation);

/// Per-class AP and their unweighted mean over classes present in the ground
/// truth. Classes with zero GT boxes are excluded from the mean.
EvalReport mean_average_precision(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthBox>& gt,
                                  const EvalConfig& cfg);

/// 100 * (candidate - baseline) / baseline. Throws on baseline <= 0.
double relative_improvement(double candidate_map, double baseline_map);

}  // namespace detfuse
