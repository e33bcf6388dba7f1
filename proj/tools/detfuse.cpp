// Command-line front end: every pipeline stage as a subcommand.
//
// Exit codes: 0 success, 1 validation/usage error, 2 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "detfuse/harness.hpp"
#include "detfuse/io.hpp"

namespace fs = std::filesystem;
using namespace detfuse;

namespace {

RunConfig load_config_if_given(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_run_config(path);
}

// Effective merged config lands next to the primary output for provenance.
void echo_config(const RunConfig& cfg, const std::string& out_path) {
  if (out_path.empty()) return;
  fs::path dir = fs::path(out_path).parent_path();
  if (dir.empty()) dir = ".";
  write_text_file(dir / "effective_config.json", run_config_to_json(cfg));
}

std::vector<Detection> load_dets(const std::string& path, bool lenient) {
  LoadDiagnostics diag;
  auto dets = load_detections(path, ClassRegistry::default_weapons(),
                              lenient ? LoadMode::lenient : LoadMode::strict,
                              &diag);
  if (diag.rejected > 0) {
    std::cerr << "warning: skipped " << diag.rejected << " bad record(s) in "
              << path << "\n";
  }
  return dets;
}

std::vector<GroundTruthBox> load_gt(const std::string& path, bool lenient) {
  LoadDiagnostics diag;
  auto gt = load_ground_truth(path, ClassRegistry::default_weapons(),
                              lenient ? LoadMode::lenient : LoadMode::strict,
                              &diag);
  if (diag.rejected > 0) {
    std::cerr << "warning: skipped " << diag.rejected << " bad record(s) in "
              << path << "\n";
  }
  return gt;
}

void print_weight_warnings(const WeightResolution& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

ReportTable parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ReportTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (ss.eof() && !line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

struct Options {
  std::string config;
  std::string detections;
  std::string gt;
  std::string ensemble;
  std::string out;
  std::string out_gt;
  std::string summary_out;
  std::string in;
  std::string format = "csv";
  std::string conf;
  std::string weights;
  std::string interp;
  double iou_threshold = 0.0;
  std::uint64_t seed = 0;
  bool lenient = false;
};

int cmd_nms(const Options& o, bool iou_set) {
  RunConfig cfg = load_config_if_given(o.config);
  if (iou_set) cfg.nms_threshold = o.iou_threshold;
  if (!(cfg.nms_threshold > 0.0 && cfg.nms_threshold < 1.0)) {
    throw ValidationError("nms iou_threshold must be in (0,1)");
  }

  const auto dets = load_dets(o.detections, o.lenient);
  std::vector<Detection> kept;
  for (auto& [model, per_model] : group_by_model(dets)) {
    for (auto& [image, batch] : group_by_image(per_model)) {
      auto k = nms(batch, NmsConfig{cfg.nms_threshold});
      kept.insert(kept.end(), k.begin(), k.end());
    }
  }
  write_detections(o.out, kept);
  echo_config(cfg, o.out);
  std::cout << "kept " << kept.size() << " of " << dets.size()
            << " detections at nms threshold "
            << format_fixed(cfg.nms_threshold, 2) << "\n";
  return 0;
}

int cmd_fuse(const Options& o, bool iou_set) {
  RunConfig cfg = load_config_if_given(o.config.empty() ? o.ensemble : o.config);
  if (iou_set) cfg.wbf_iou_threshold = o.iou_threshold;
  if (!o.conf.empty()) cfg.conf_strategy = conf_strategy_from_string(o.conf);
  if (!o.weights.empty())
    cfg.weight_strategy = weight_strategy_from_string(o.weights);
  cfg.ensemble.validate();
  print_weight_warnings(resolve_weights(cfg.weight_strategy, cfg.ensemble));

  const auto dets = load_dets(o.detections, o.lenient);
  const FusionConfig fusion{cfg.wbf_iou_threshold, cfg.conf_strategy,
                            cfg.weight_strategy};
  const auto fused = fuse_all_images(dets, fusion, cfg.ensemble);
  write_fused(o.out, fused);
  echo_config(cfg, o.out);
  std::cout << "fused " << dets.size() << " detections into " << fused.size()
            << "\n";
  return 0;
}

int cmd_eval(const Options& o, bool iou_set) {
  RunConfig cfg = load_config_if_given(o.config);
  if (iou_set) cfg.eval.iou_threshold = o.iou_threshold;
  if (!o.interp.empty())
    cfg.eval.interpolation = interpolation_from_string(o.interp);

  const auto dets = load_dets(o.detections, o.lenient);
  const auto gt = load_gt(o.gt, o.lenient);
  const auto report = mean_average_precision(dets, gt, cfg.eval);
  const auto table =
      report_to_table(report, ClassRegistry::default_weapons());
  const auto rendered =
      render_table(table, table_format_from_string(o.format));
  std::cout << rendered;
  if (!o.out.empty()) {
    write_text_file(o.out, rendered);
    echo_config(cfg, o.out);
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  RunConfig cfg = load_run_config(o.config);
  if (!cfg.sweep) cfg.sweep = SweepSection{};

  SweepOutcome outcome;
  if (cfg.sweep->fixture) {
    SweepTable table;
    table.thresholds = cfg.sweep->thresholds;
    table.models = cfg.sweep->fixture->models;
    table.cells = cfg.sweep->fixture->cells;
    outcome = analyze_sweep(std::move(table));
  } else {
    if (o.detections.empty() || o.gt.empty()) {
      throw ValidationError(
          "sweep without fixture cells needs --detections and --gt");
    }
    SweepSpec spec;
    spec.thresholds = cfg.sweep->thresholds;
    spec.per_model = group_by_model(load_dets(o.detections, o.lenient));
    spec.ground_truth = load_gt(o.gt, o.lenient);
    spec.eval = cfg.eval;
    outcome = run_nms_sweep(spec);
  }

  const auto rendered = render_table(sweep_to_table(outcome),
                                     table_format_from_string(o.format));
  std::cout << rendered;
  std::cout << "selected nms threshold: "
            << format_fixed(outcome.selected_threshold, 2) << "\n";
  for (const auto& [model, thr] : outcome.best_threshold_per_model) {
    std::cout << "best for " << model << ": " << format_fixed(thr, 2) << "\n";
  }
  if (!o.out.empty()) {
    write_text_file(o.out, rendered);
    echo_config(cfg, o.out);
  }
  return 0;
}

int cmd_grid(const Options& o) {
  RunConfig cfg = load_run_config(o.config);
  if (!cfg.grid) cfg.grid = GridSection{};
  cfg.ensemble.validate();

  GridOutcome outcome;
  if (cfg.grid->fixture) {
    GridTable table;
    table.conf_strategies = cfg.grid->conf_strategies;
    table.weight_strategies = cfg.grid->weight_strategies;
    table.cells = cfg.grid->fixture->cells;
    // Fixture mode has no per-model detections; the baseline is the best
    // standalone quality in the ensemble spec.
    std::string best_model;
    double best_q = 0.0;
    for (const auto& p : cfg.ensemble.profiles) {
      if (best_model.empty() || p.quality > best_q) {
        best_model = p.model_id;
        best_q = p.quality;
      }
    }
    outcome = analyze_grid(std::move(table), best_model, best_q);
  } else {
    if (o.detections.empty() || o.gt.empty()) {
      throw ValidationError(
          "grid without fixture cells needs --detections and --gt");
    }
    GridSpec spec;
    spec.conf_strategies = cfg.grid->conf_strategies;
    spec.weight_strategies = cfg.grid->weight_strategies;
    spec.wbf_iou_threshold = cfg.wbf_iou_threshold;
    spec.ensemble = cfg.ensemble;
    spec.per_model = group_by_model(load_dets(o.detections, o.lenient));
    spec.ground_truth = load_gt(o.gt, o.lenient);
    spec.eval = cfg.eval;
    outcome = run_wbf_grid(spec);
  }

  const auto rendered = render_table(grid_to_table(outcome),
                                     table_format_from_string(o.format));
  std::cout << rendered;
  std::cout << "best cell: conf=" << to_string(outcome.best_conf)
            << " weights=" << to_string(outcome.best_weight)
            << " mAP=" << format_fixed(outcome.best_map, 4) << "\n";
  std::cout << "best single model: " << outcome.best_single_model
            << " mAP=" << format_fixed(outcome.best_single_map, 4) << "\n";
  std::cout << "relative improvement: "
            << format_fixed(outcome.relative_improvement_pct, 3) << "%\n";
  if (!o.out.empty()) {
    write_text_file(o.out, rendered);
    const std::string summary = o.summary_out.empty()
        ? (fs::path(o.out).parent_path() / "summary.json").string()
        : o.summary_out;
    write_text_file(summary, grid_summary_json(outcome));
    echo_config(cfg, o.out);
  } else if (!o.summary_out.empty()) {
    write_text_file(o.summary_out, grid_summary_json(outcome));
  }
  return 0;
}

int cmd_simulate(const Options& o, bool seed_set) {
  RunConfig cfg = load_run_config(o.config);
  if (!cfg.sim || cfg.sim->models.empty()) {
    throw ValidationError("config has no sim section");
  }
  if (seed_set) cfg.seed = o.seed;

  std::vector<GroundTruthBox> gt;
  int num_classes = 3;
  if (!o.gt.empty()) {
    gt = load_gt(o.gt, o.lenient);
  } else if (cfg.sim->generate_gt) {
    GtGenSpec gen = *cfg.sim->generate_gt;
    gen.seed = cfg.seed;
    gt = generate_ground_truth(gen);
    num_classes = gen.num_classes;
  } else {
    throw ValidationError("simulate needs --gt or a sim.generate_gt section");
  }

  SimSpec sim{cfg.sim->models, cfg.seed, num_classes};
  const auto dets = simulate_detectors(gt, sim);
  write_detections(o.out, dets);
  if (!o.out_gt.empty()) {
    std::ostringstream os;
    for (const auto& g : gt) {
      os << "{\"image_id\":\"" << g.image_id
         << "\",\"class_id\":" << g.class_id << ",\"bbox\":["
         << format_fixed(g.box.x1, 9) << "," << format_fixed(g.box.y1, 9)
         << "," << format_fixed(g.box.x2, 9) << ","
         << format_fixed(g.box.y2, 9) << "],\"coord_mode\":\"normalized\"}\n";
    }
    write_text_file(o.out_gt, os.str());
  }
  echo_config(cfg, o.out);
  std::cout << "simulated " << dets.size() << " detections over " << gt.size()
            << " ground-truth boxes\n";
  return 0;
}

int cmd_report(const Options& o) {
  const auto table = parse_csv(o.in);
  const auto rendered =
      render_table(table, table_format_from_string(o.format));
  if (o.out.empty()) {
    std::cout << rendered;
  } else {
    write_text_file(o.out, rendered);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "detfuse: detection-ensemble post-processing (NMS, weighted boxes "
      "fusion, mAP evaluation, experiment harness)"};
  app.require_subcommand(1);

  Options o;

  auto* nms_cmd = app.add_subcommand("nms", "Per-model NMS over a batch");
  nms_cmd->add_option("--detections", o.detections)->required();
  nms_cmd->add_option("--out", o.out)->required();
  nms_cmd->add_option("--config", o.config);
  auto* nms_iou = nms_cmd->add_option("--iou-threshold", o.iou_threshold,
                                      "suppression threshold (default 0.55)");
  nms_cmd->add_flag("--lenient", o.lenient);

  auto* fuse_cmd = app.add_subcommand("fuse", "Weighted boxes fusion");
  fuse_cmd->add_option("--detections", o.detections)->required();
  fuse_cmd->add_option("--ensemble", o.ensemble,
                       "ensemble spec JSON ({\"models\": [...]})");
  fuse_cmd->add_option("--config", o.config);
  fuse_cmd->add_option("--out", o.out)->required();
  auto* fuse_iou = fuse_cmd->add_option("--iou-threshold", o.iou_threshold,
                                        "fusion threshold (default 0.5)");
  fuse_cmd->add_option("--conf", o.conf,
                       "max|avg|box_and_model_avg|absent_model_aware_avg");
  fuse_cmd->add_option("--weights", o.weights,
                       "quality|uniform|rank_linear|rank_squared");
  fuse_cmd->add_flag("--lenient", o.lenient);

  auto* eval_cmd = app.add_subcommand("eval", "mAP@IoU evaluation");
  eval_cmd->add_option("--detections", o.detections)->required();
  eval_cmd->add_option("--gt", o.gt)->required();
  eval_cmd->add_option("--config", o.config);
  auto* eval_iou = eval_cmd->add_option("--iou-threshold", o.iou_threshold,
                                        "matching threshold (default 0.5)");
  eval_cmd->add_option("--interp", o.interp, "all_point|eleven_point");
  eval_cmd->add_option("--format", o.format, "csv|markdown");
  eval_cmd->add_option("--out", o.out);
  eval_cmd->add_flag("--lenient", o.lenient);

  auto* sweep_cmd =
      app.add_subcommand("sweep", "NMS threshold sweep (table + selection)");
  sweep_cmd->add_option("--config", o.config)->required();
  sweep_cmd->add_option("--detections", o.detections);
  sweep_cmd->add_option("--gt", o.gt);
  sweep_cmd->add_option("--format", o.format, "csv|markdown");
  sweep_cmd->add_option("--out", o.out);
  sweep_cmd->add_flag("--lenient", o.lenient);

  auto* grid_cmd = app.add_subcommand(
      "grid", "confidence x weighting strategy grid (table + summary)");
  grid_cmd->add_option("--config", o.config)->required();
  grid_cmd->add_option("--detections", o.detections);
  grid_cmd->add_option("--gt", o.gt);
  grid_cmd->add_option("--format", o.format, "csv|markdown");
  grid_cmd->add_option("--out", o.out);
  grid_cmd->add_option("--summary-out", o.summary_out);
  grid_cmd->add_flag("--lenient", o.lenient);

  auto* sim_cmd =
      app.add_subcommand("simulate", "Seeded synthetic detector outputs");
  sim_cmd->add_option("--config", o.config)->required();
  sim_cmd->add_option("--gt", o.gt, "existing ground-truth JSONL");
  sim_cmd->add_option("--out", o.out)->required();
  sim_cmd->add_option("--out-gt", o.out_gt,
                      "write generated ground truth here");
  auto* sim_seed = sim_cmd->add_option("--seed", o.seed);
  sim_cmd->add_flag("--lenient", o.lenient);

  auto* report_cmd =
      app.add_subcommand("report", "Re-render a CSV report table");
  report_cmd->add_option("--in", o.in)->required();
  report_cmd->add_option("--format", o.format, "csv|markdown");
  report_cmd->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (nms_cmd->parsed()) return cmd_nms(o, nms_iou->count() > 0);
    if (fuse_cmd->parsed()) return cmd_fuse(o, fuse_iou->count() > 0);
    if (eval_cmd->parsed()) return cmd_eval(o, eval_iou->count() > 0);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    if (grid_cmd->parsed()) return cmd_grid(o);
    if (sim_cmd->parsed()) return cmd_simulate(o, sim_seed->count() > 0);
    if (report_cmd->parsed()) return cmd_report(o);
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
