#include "detfuse/eval.hpp"

#include <algorithm>
#include <set>

namespace detfuse {

const char* to_string(Interpolation i) {
  return i == Interpolation::all_point ? "all_point" : "eleven_point";
}

Interpolation interpolation_from_string(const std::string& s) {
  if (s == "all_point") return Interpolation::all_point;
  if (s == "eleven_point") return Interpolation::eleven_point;
  throw ValidationError("unknown interpolation: " + s);
}

std::vector<bool> match_detections(const std::vector<Detection>& detections,
                                   const std::vector<GroundTruthBox>& gt,
                                   double iou_threshold) {
  // GT indices per image, plus a matched flag per GT box.
  std::map<std::string, std::vector<std::size_t>> gt_by_image;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt_by_image[gt[i].image_id].push_back(i);
  }
  std::vector<bool> gt_matched(gt.size(), false);

  std::vector<bool> labels;
  labels.reserve(detections.size());
  for (const auto& d : detections) {
    int best = -1;
    double best_iou = 0.0;
    auto it = gt_by_image.find(d.image_id);
    if (it != gt_by_image.end()) {
      for (std::size_t gi : it->second) {
        if (gt_matched[gi] || gt[gi].class_id != d.class_id) continue;
        const double v = iou(d.box, gt[gi].box);
        if (v >= iou_threshold && v > best_iou) {
          best_iou = v;
          best = static_cast<int>(gi);
        }
      }
    }
    if (best >= 0) {
      gt_matched[best] = true;
      labels.push_back(true);
    } else {
      labels.push_back(false);
    }
  }
  return labels;
}

double average_precision(const std::vector<bool>& labels, int num_gt,
                         Interpolation interpolation) {
  if (num_gt == 0) return labels.empty() ? 1.0 : 0.0;

  const std::size_t n = labels.size();
  std::vector<double> recall(n), precision(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k]) ++tp;
    recall[k] = static_cast<double>(tp) / num_gt;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }

  if (interpolation == Interpolation::eleven_point) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double r = i / 10.0;
      double p = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (recall[k] >= r) p = std::max(p, precision[k]);
      }
      sum += p;
    }
    return sum / 11.0;
  }

  // all_point: precision envelope, summed over recall increments at TPs.
  std::vector<double> env(precision);
  for (std::size_t k = n; k-- > 1;) {
    env[k - 1] = std::max(env[k - 1], env[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k]) {
      ap += (recall[k] - prev_recall) * env[k];
      prev_recall = recall[k];
    }
  }
  return ap;
}

EvalReport mean_average_precision(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthBox>& gt,
                                  const EvalConfig& cfg) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0)) {
    throw ValidationError("eval iou_threshold must be in (0,1)");
  }

  std::set<int> classes;
  for (const auto& g : gt) classes.insert(g.class_id);
  for (const auto& d : detections) classes.insert(d.class_id);

  EvalReport report;
  double ap_sum = 0.0;
  int scored_classes = 0;
  for (int cls : classes) {
    std::vector<Detection> dets;
    for (const auto& d : detections)
      if (d.class_id == cls) dets.push_back(d);
    std::vector<GroundTruthBox> cls_gt;
    for (const auto& g : gt)
      if (g.class_id == cls) cls_gt.push_back(g);

    // Score-descending with a full tie-break key for determinism.
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) {
                       if (a.score != b.score) return a.score > b.score;
                       if (!(a.box == b.box)) return box_less(a.box, b.box);
                       return a.image_id < b.image_id;
                     });

    const auto labels = match_detections(dets, cls_gt, cfg.iou_threshold);
    ClassResult r;
    r.num_gt = static_cast<int>(cls_gt.size());
    for (bool tp : labels) (tp ? r.tp : r.fp)++;
    r.fn = r.num_gt - r.tp;
    r.ap = average_precision(labels, r.num_gt, cfg.interpolation);
    report.per_class[cls] = r;
    if (r.num_gt > 0) {
      ap_sum += r.ap;
      ++scored_classes;
    }
  }
  report.map = scored_classes > 0 ? ap_sum / scored_classes : 0.0;
  return report;
}

double relative_improvement(double candidate_map, double baseline_map) {
  if (!(baseline_map > 0.0)) {
    throw ValidationError("baseline mAP must be positive");
  }
  return 100.0 * (candidate_map - baseline_map) / baseline_map;
}

}  // namespace detfuse
