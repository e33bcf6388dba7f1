#pragma once

#include <map>
#include <string>
#include <vector>

#include "detfuse/eval.hpp"
#include "detfuse/io.hpp"
#include "detfuse/nms.hpp"
#include "detfuse/sim.hpp"
#include "detfuse/wbf.hpp"

namespace detfuse {

// ---- NMS threshold sweep --------------------------------------------------

struct SweepSpec {
  std::vector<double> thresholds;  // strictly increasing, each in (0,1)
  std::map<std::string, std::vector<Detection>> per_model;
  std::vector<GroundTruthBox> ground_truth;
  EvalConfig eval;
};

struct SweepTable {
  std::vector<double> thresholds;
  std::vector<std::string> models;
  std::vector<std::vector<double>> cells;  // [threshold][model] -> mAP
};

struct SweepOutcome {
  SweepTable table;
  std::vector<double> average_per_threshold;
  std::map<std::string, double> best_threshold_per_model;
  double selected_threshold = 0.0;  // arg-max of the cross-model average
};

/// Selection logic over an already-populated table, so precomputed fixture
/// values can exercise the same code path. Ties resolve to the lower
/// threshold.
SweepOutcome analyze_sweep(SweepTable table);

/// For every (threshold, model): NMS per image, then mAP against the ground
/// truth. Throws if a model has no detections entry.
SweepOutcome run_nms_sweep(const SweepSpec& spec);

ReportTable sweep_to_table(const SweepOutcome& outcome);

// ---- WBF strategy grid ----------------------------------------------------

struct GridSpec {
  std::vector<ConfStrategy> conf_strategies;
  std::vector<WeightStrategy> weight_strategies;
  double wbf_iou_threshold = 0.5;
  EnsembleSpec ensemble;
  std::map<std::string, std::vector<Detection>> per_model;  // post-NMS
  std::vector<GroundTruthBox> ground_truth;
  EvalConfig eval;
};

struct GridTable {
  std::vector<ConfStrategy> conf_strategies;
  std::vector<WeightStrategy> weight_strategies;
  std::vector<std::vector<double>> cells;  // [conf][weight] -> mAP
};

struct GridOutcome {
  GridTable table;
  ConfStrategy best_conf = ConfStrategy::max;
  WeightStrategy best_weight = WeightStrategy::quality;
  double best_map = 0.0;
  std::string best_single_model;
  double best_single_map = 0.0;
  double relative_improvement_pct = 0.0;
};

/// Best-cell summary over a populated grid (ties: earlier strategy order).
GridOutcome analyze_grid(GridTable table, const std::string& best_single_model,
                         double best_single_map);

/// Fuses the ensemble per image for every (confidence, weighting) cell and
/// evaluates mAP. The baseline is the best standalone mAP among the input
/// models, evaluated on the same ground truth.
GridOutcome run_wbf_grid(const GridSpec& spec);

ReportTable grid_to_table(const GridOutcome& outcome);

/// Best cell, baseline, and relative improvement as a JSON document.
std::string grid_summary_json(const GridOutcome& outcome);

/// Fused detections in plain Detection form (model_id "ensemble"), for
/// feeding back into evaluation.
std::vector<Detection> fused_to_detections(
    const std::vector<FusedDetection>& fused);

/// Runs weighted_boxes_fusion image by image over a multi-image batch.
std::vector<FusedDetection> fuse_all_images(
    const std::vector<Detection>& detections, const FusionConfig& cfg,
    const EnsembleSpec& spec);

}  // namespace detfuse
