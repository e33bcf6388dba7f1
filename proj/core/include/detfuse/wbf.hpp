#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "detfuse/detection.hpp"

namespace detfuse {

enum class ConfStrategy { max, avg, box_and_model_avg, absent_model_aware_avg };

const char* to_string(ConfStrategy s);
ConfStrategy conf_strategy_from_string(const std::string& s);

struct FusionConfig {
  double iou_threshold = 0.5;
  ConfStrategy conf_strategy = ConfStrategy::max;
  WeightStrategy weight_strategy = WeightStrategy::quality;
};

struct ClusterMember {
  Detection detection;
  double weight = 1.0;  // resolved model weight
};

/// Same-class, same-image detections grouped at IoU above the fusion
/// threshold. fused_box is kept equal to the weighted average of the current
/// members at all times; incoming boxes are compared against it.
struct Cluster {
  std::vector<ClusterMember> members;
  BoundingBox fused_box;
  int class_id = 0;
  std::string image_id;
};

struct FusedDetection {
  std::string image_id;
  int class_id = 0;
  double score = 0.0;
  BoundingBox box;
  int support = 0;                  // member box count
  std::set<std::string> model_ids;  // contributing models
};

/// Groups one image's pooled multi-model detections into clusters.
/// Boxes are visited in descending score*weight order (ties: canonical model
/// order, then box coordinates); each joins the first same-class cluster
/// whose current fused box overlaps it with IoU > threshold, else seeds a
/// new cluster. Every input box lands in exactly one cluster.
std::vector<Cluster> cluster_detections(
    const std::vector<Detection>& detections, const EnsembleSpec& spec,
    const std::map<std::string, double>& weights, double iou_threshold);

/// Score-and-weight weighted average of the members' coordinates, applied
/// independently to x1, y1, x2, y2.
BoundingBox fuse_coordinates(const Cluster& cluster);

/// Fused confidence for one cluster.
///   max                    : max_j(s_j*w_j) / max weight over ALL ensemble
///                            models (not just cluster members)
///   avg                    : sum_j(s_j*w_j) / sum_j(w_j) over members
///   box_and_model_avg      : avg scaled by (sum of unique contributing model
///                            weights / sum of all ensemble weights)
///   absent_model_aware_avg : sum_j(s_j*w_j) / (sum_j w_j + sum of absent
///                            models' weights)
double fuse_confidence(const Cluster& cluster, ConfStrategy strategy,
                       const EnsembleSpec& spec,
                       const std::map<std::string, double>& weights);

/// Full weighted-boxes-fusion pass over one image: resolve weights, cluster,
/// fuse coordinates and confidence, emit one detection per cluster sorted by
/// descending score. Output count never exceeds input count.
/// Throws ValidationError when a detection's model id is not in the spec.
std::vector<FusedDetection> weighted_boxes_fusion(
    const std::vector<Detection>& detections, const FusionConfig& cfg,
    const EnsembleSpec& spec);

}  // namespace detfuse
