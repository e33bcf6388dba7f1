#include "detfuse/wbf.hpp"

#include <algorithm>
#include <limits>

namespace detfuse {

const char* to_string(ConfStrategy s) {
  switch (s) {
    case ConfStrategy::max: return "max";
    case ConfStrategy::avg: return "avg";
    case ConfStrategy::box_and_model_avg: return "box_and_model_avg";
    case ConfStrategy::absent_model_aware_avg: return "absent_model_aware_avg";
  }
  return "?";
}

ConfStrategy conf_strategy_from_string(const std::string& s) {
  if (s == "max") return ConfStrategy::max;
  if (s == "avg") return ConfStrategy::avg;
  if (s == "box_and_model_avg") return ConfStrategy::box_and_model_avg;
  if (s == "absent_model_aware_avg")
    return ConfStrategy::absent_model_aware_avg;
  throw ValidationError("unknown confidence strategy: " + s);
}

BoundingBox fuse_coordinates(const Cluster& cluster) {
  // a lone member's box passes through untouched
  if (cluster.members.size() == 1) return cluster.members.front().detection.box;
  double wsum = 0.0;
  BoundingBox acc{0.0, 0.0, 0.0, 0.0};
  for (const auto& m : cluster.members) {
    const double sw = m.detection.score * m.weight;
    acc.x1 += sw * m.detection.box.x1;
    acc.y1 += sw * m.detection.box.y1;
    acc.x2 += sw * m.detection.box.x2;
    acc.y2 += sw * m.detection.box.y2;
    wsum += sw;
  }
  acc.x1 /= wsum;
  acc.y1 /= wsum;
  acc.x2 /= wsum;
  acc.y2 /= wsum;
  return acc;
}

std::vector<Cluster> cluster_detections(
    const std::vector<Detection>& detections, const EnsembleSpec& spec,
    const std::map<std::string, double>& weights, double iou_threshold) {
  struct Entry {
    const Detection* det;
    double weight;
    int model_index;
  };
  std::vector<Entry> order;
  order.reserve(detections.size());
  for (const auto& d : detections) {
    const int idx = spec.index_of(d.model_id);
    if (idx < 0) {
      throw ValidationError("detection from unknown model '" + d.model_id +
                            "'");
    }
    order.push_back(Entry{&d, weights.at(d.model_id), idx});
  }
  std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    const double sa = a.det->score * a.weight;
    const double sb = b.det->score * b.weight;
    if (sa != sb) return sa > sb;
    if (a.model_index != b.model_index) return a.model_index < b.model_index;
    if (a.det->class_id != b.det->class_id)
      return a.det->class_id < b.det->class_id;
    return box_less(a.det->box, b.det->box);
  });

  std::vector<Cluster> clusters;
  for (const auto& e : order) {
    Cluster* target = nullptr;
    for (auto& c : clusters) {
      if (c.class_id != e.det->class_id || c.image_id != e.det->image_id)
        continue;
      if (iou(c.fused_box, e.det->box) > iou_threshold) {
        target = &c;
        break;
      }
    }
    if (target == nullptr) {
      Cluster c;
      c.class_id = e.det->class_id;
      c.image_id = e.det->image_id;
      c.members.push_back(ClusterMember{*e.det, e.weight});
      c.fused_box = e.det->box;
      clusters.push_back(std::move(c));
    } else {
      target->members.push_back(ClusterMember{*e.det, e.weight});
      target->fused_box = fuse_coordinates(*target);
    }
  }
  return clusters;
}

double fuse_confidence(const Cluster& cluster, ConfStrategy strategy,
                       const EnsembleSpec& spec,
                       const std::map<std::string, double>& weights) {
  double sw_sum = 0.0;     // sum of score*weight over members
  double w_sum = 0.0;      // sum of weights over members (per box)
  double sw_max = 0.0;     // max score*weight over members
  std::set<std::string> contributing;
  for (const auto& m : cluster.members) {
    const double sw = m.detection.score * m.weight;
    sw_sum += sw;
    w_sum += m.weight;
    sw_max = std::max(sw_max, sw);
    contributing.insert(m.detection.model_id);
  }

  switch (strategy) {
    case ConfStrategy::max: {
      double w_max = 0.0;
      for (const auto& p : spec.profiles)
        w_max = std::max(w_max, weights.at(p.model_id));
      return sw_max / w_max;
    }
    case ConfStrategy::avg:
      return sw_sum / w_sum;
    case ConfStrategy::box_and_model_avg: {
      double contrib_w = 0.0;
      double total_w = 0.0;
      for (const auto& p : spec.profiles) {
        const double w = weights.at(p.model_id);
        total_w += w;
        if (contributing.contains(p.model_id)) contrib_w += w;
      }
      return (sw_sum / w_sum) * (contrib_w / total_w);
    }
    case ConfStrategy::absent_model_aware_avg: {
      double absent_w = 0.0;
      for (const auto& p : spec.profiles) {
        if (!contributing.contains(p.model_id))
          absent_w += weights.at(p.model_id);
      }
      return sw_sum / (w_sum + absent_w);
    }
  }
  return 0.0;
}

std::vector<FusedDetection> weighted_boxes_fusion(
    const std::vector<Detection>& detections, const FusionConfig& cfg,
    const EnsembleSpec& spec) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0)) {
    throw ValidationError("wbf iou_threshold must be in (0,1)");
  }
  const auto resolved = resolve_weights(cfg.weight_strategy, spec);
  const auto clusters =
      cluster_detections(detections, spec, resolved.weights, cfg.iou_threshold);

  std::vector<FusedDetection> fused;
  fused.reserve(clusters.size());
  for (const auto& c : clusters) {
    FusedDetection f;
    f.image_id = c.image_id;
    f.class_id = c.class_id;
    f.box = c.fused_box;
    f.score = fuse_confidence(c, cfg.conf_strategy, spec, resolved.weights);
    f.support = static_cast<int>(c.members.size());
    for (const auto& m : c.members) f.model_ids.insert(m.detection.model_id);
    fused.push_back(std::move(f));
  }
  std::sort(fused.begin(), fused.end(),
            [](const FusedDetection& a, const FusedDetection& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.class_id != b.class_id) return a.class_id < b.class_id;
              return box_less(a.box, b.box);
            });
  return fused;
}

}  // namespace detfuse
