#include "detfuse/harness.hpp"

#include <algorithm>
#include <sstream>

namespace detfuse {

namespace {

void check_thresholds(const std::vector<double>& ts) {
  if (ts.empty()) throw ValidationError("threshold list is empty");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0 && ts[i] < 1.0)) {
      throw ValidationError("thresholds must lie in (0,1)");
    }
    if (i > 0 && ts[i] <= ts[i - 1]) {
      throw ValidationError("thresholds must be strictly increasing");
    }
  }
}

}  // namespace

SweepOutcome analyze_sweep(SweepTable table) {
  check_thresholds(table.thresholds);
  if (table.models.empty()) throw ValidationError("sweep has no models");
  if (table.cells.size() != table.thresholds.size()) {
    throw ValidationError("sweep cell rows do not match thresholds");
  }
  for (const auto& row : table.cells) {
    if (row.size() != table.models.size()) {
      throw ValidationError("sweep cell row does not match model count");
    }
  }

  SweepOutcome out;
  out.average_per_threshold.resize(table.thresholds.size());
  for (std::size_t t = 0; t < table.thresholds.size(); ++t) {
    double sum = 0.0;
    for (double v : table.cells[t]) sum += v;
    out.average_per_threshold[t] = sum / table.models.size();
  }
  std::size_t best_t = 0;
  for (std::size_t t = 1; t < table.thresholds.size(); ++t) {
    if (out.average_per_threshold[t] > out.average_per_threshold[best_t])
      best_t = t;
  }
  out.selected_threshold = table.thresholds[best_t];

  for (std::size_t m = 0; m < table.models.size(); ++m) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < table.thresholds.size(); ++t) {
      if (table.cells[t][m] > table.cells[best][m]) best = t;
    }
    out.best_threshold_per_model[table.models[m]] = table.thresholds[best];
  }
  out.table = std::move(table);
  return out;
}

SweepOutcome run_nms_sweep(const SweepSpec& spec) {
  check_thresholds(spec.thresholds);
  if (spec.per_model.empty()) throw ValidationError("sweep has no models");

  SweepTable table;
  table.thresholds = spec.thresholds;
  for (const auto& [model, _] : spec.per_model) table.models.push_back(model);

  for (double threshold : spec.thresholds) {
    std::vector<double> row;
    for (const auto& model : table.models) {
      const auto& dets = spec.per_model.at(model);
      std::vector<Detection> suppressed;
      for (auto& [image, batch] : group_by_image(dets)) {
        auto kept = nms(batch, NmsConfig{threshold});
        suppressed.insert(suppressed.end(), kept.begin(), kept.end());
      }
      row.push_back(
          mean_average_precision(suppressed, spec.ground_truth, spec.eval)
              .map);
    }
    table.cells.push_back(std::move(row));
  }
  return analyze_sweep(std::move(table));
}

ReportTable sweep_to_table(const SweepOutcome& outcome) {
  ReportTable t;
  t.header.push_back("nms_threshold");
  for (const auto& m : outcome.table.models) t.header.push_back(m);
  for (std::size_t i = 0; i < outcome.table.thresholds.size(); ++i) {
    std::vector<std::string> row;
    row.push_back(format_fixed(outcome.table.thresholds[i], 2));
    for (double v : outcome.table.cells[i]) row.push_back(format_fixed(v, 4));
    t.rows.push_back(std::move(row));
  }
  return t;
}

GridOutcome analyze_grid(GridTable table, const std::string& best_single_model,
                         double best_single_map) {
  if (table.conf_strategies.empty() || table.weight_strategies.empty()) {
    throw ValidationError("grid strategy sets must be non-empty");
  }
  if (table.cells.size() != table.conf_strategies.size()) {
    throw ValidationError("grid cell rows do not match strategies");
  }
  for (const auto& row : table.cells) {
    if (row.size() != table.weight_strategies.size()) {
      throw ValidationError("grid cell row does not match weight strategies");
    }
  }

  GridOutcome out;
  std::size_t bc = 0, bw = 0;
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    for (std::size_t w = 0; w < table.cells[c].size(); ++w) {
      if (table.cells[c][w] > table.cells[bc][bw]) {
        bc = c;
        bw = w;
      }
    }
  }
  out.best_conf = table.conf_strategies[bc];
  out.best_weight = table.weight_strategies[bw];
  out.best_map = table.cells[bc][bw];
  out.best_single_model = best_single_model;
  out.best_single_map = best_single_map;
  out.relative_improvement_pct =
      relative_improvement(out.best_map, best_single_map);
  out.table = std::move(table);
  return out;
}

std::vector<Detection> fused_to_detections(
    const std::vector<FusedDetection>& fused) {
  std::vector<Detection> out;
  out.reserve(fused.size());
  for (const auto& f : fused) {
    out.push_back(Detection{f.image_id, "ensemble", f.class_id, f.score,
                            f.box});
  }
  return out;
}

std::vector<FusedDetection> fuse_all_images(
    const std::vector<Detection>& detections, const FusionConfig& cfg,
    const EnsembleSpec& spec) {
  std::vector<FusedDetection> fused;
  for (auto& [image, batch] : group_by_image(detections)) {
    auto f = weighted_boxes_fusion(batch, cfg, spec);
    fused.insert(fused.end(), std::make_move_iterator(f.begin()),
                 std::make_move_iterator(f.end()));
  }
  return fused;
}

GridOutcome run_wbf_grid(const GridSpec& spec) {
  spec.ensemble.validate();
  std::vector<Detection> pooled;
  for (const auto& p : spec.ensemble.profiles) {
    auto it = spec.per_model.find(p.model_id);
    if (it == spec.per_model.end()) {
      throw ValidationError("missing detections for model '" + p.model_id +
                            "'");
    }
    pooled.insert(pooled.end(), it->second.begin(), it->second.end());
  }

  std::string best_model;
  double best_map = 0.0;
  for (const auto& p : spec.ensemble.profiles) {
    const double m =
        mean_average_precision(spec.per_model.at(p.model_id),
                               spec.ground_truth, spec.eval)
            .map;
    if (best_model.empty() || m > best_map) {
      best_model = p.model_id;
      best_map = m;
    }
  }

  GridTable table;
  table.conf_strategies = spec.conf_strategies;
  table.weight_strategies = spec.weight_strategies;
  for (ConfStrategy conf : spec.conf_strategies) {
    std::vector<double> row;
    for (WeightStrategy ws : spec.weight_strategies) {
      FusionConfig cfg{spec.wbf_iou_threshold, conf, ws};
      const auto fused = fuse_all_images(pooled, cfg, spec.ensemble);
      row.push_back(mean_average_precision(fused_to_detections(fused),
                                           spec.ground_truth, spec.eval)
                        .map);
    }
    table.cells.push_back(std::move(row));
  }
  return analyze_grid(std::move(table), best_model, best_map);
}

ReportTable grid_to_table(const GridOutcome& outcome) {
  ReportTable t;
  t.header.push_back("conf_strategy");
  for (auto w : outcome.table.weight_strategies) {
    t.header.push_back(to_string(w));
  }
  for (std::size_t c = 0; c < outcome.table.conf_strategies.size(); ++c) {
    std::vector<std::string> row;
    row.push_back(to_string(outcome.table.conf_strategies[c]));
    for (double v : outcome.table.cells[c]) row.push_back(format_fixed(v, 4));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string grid_summary_json(const GridOutcome& outcome) {
  std::ostringstream os;
  os << "{\"best_cell\":{\"conf_strategy\":\"" << to_string(outcome.best_conf)
     << "\",\"weight_strategy\":\"" << to_string(outcome.best_weight)
     << "\",\"map\":" << format_fixed(outcome.best_map, 4)
     << "},\"best_single_model\":\"" << outcome.best_single_model
     << "\",\"best_single_map\":" << format_fixed(outcome.best_single_map, 4)
     << ",\"relative_improvement_pct\":"
     << format_fixed(outcome.relative_improvement_pct, 3) << "}\n";
  return os.str();
}

}  // namespace detfuse
