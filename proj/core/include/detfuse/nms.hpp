#pragma once

#include <vector>

#include "detfuse/detection.hpp"

namespace detfuse {

struct NmsConfig {
  double iou_threshold = 0.55;
};

/// Greedy per-class non-maximum suppression over one (image, model) batch.
/// Repeatedly keeps the highest-scored remaining box and discards same-class
/// boxes whose IoU with it exceeds the threshold (strict >). Boxes and
/// scores pass through unmodified; output is sorted by descending score with
/// lexicographic box order breaking ties.
///
/// Throws ValidationError if the batch mixes image or model ids, or if the
/// threshold is outside (0,1).
std::vector<Detection> nms(const std::vector<Detection>& detections,
                           const NmsConfig& cfg);

}  // namespace detfuse
