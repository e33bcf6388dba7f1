#include "detfuse/nms.hpp"

#include <algorithm>

namespace detfuse {

namespace {

bool score_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  return box_less(a.box, b.box);
}

}  // namespace

std::vector<Detection> nms(const std::vector<Detection>& detections,
                           const NmsConfig& cfg) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0)) {
    throw ValidationError("nms iou_threshold must be in (0,1)");
  }
  for (const auto& d : detections) {
    if (d.image_id != detections.front().image_id ||
        d.model_id != detections.front().model_id) {
      throw ValidationError("heterogeneous batch");
    }
  }

  std::vector<Detection> sorted = detections;
  std::sort(sorted.begin(), sorted.end(), score_order);

  std::vector<Detection> kept;
  kept.reserve(sorted.size());
  for (const auto& d : sorted) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (k.class_id == d.class_id && iou(k.box, d.box) > cfg.iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

}  // namespace detfuse
