#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detfuse/detection.hpp"
#include "detfuse/eval.hpp"
#include "detfuse/sim.hpp"
#include "detfuse/wbf.hpp"

namespace detfuse {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LoadMode { strict, lenient };

struct LoadDiagnostics {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<std::string> messages;  // "line N: reason"
};

/// Reads one detection per JSON line. Pixel-mode records are converted to
/// normalized coordinates using their image_w/image_h; every record then
/// goes through validate_detection. strict mode throws on the first bad
/// line; lenient mode skips bad lines and counts them in the diagnostics.
std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       const ClassRegistry& classes,
                                       LoadMode mode = LoadMode::strict,
                                       LoadDiagnostics* diag = nullptr);

/// Same schema minus model_id and score.
std::vector<GroundTruthBox> load_ground_truth(
    const std::filesystem::path& path, const ClassRegistry& classes,
    LoadMode mode = LoadMode::strict, LoadDiagnostics* diag = nullptr);

/// Writes detections as JSONL with a fixed field order and 9-decimal
/// coordinates; byte-identical across runs for identical input.
void write_detections(const std::filesystem::path& path,
                      const std::vector<Detection>& detections);

/// Fused output keeps the same detection schema (model_id = "ensemble")
/// plus support counts.
void write_fused(const std::filesystem::path& path,
                 const std::vector<FusedDetection>& fused);

std::map<std::string, std::vector<Detection>> group_by_model(
    const std::vector<Detection>& detections);
std::map<std::string, std::vector<Detection>> group_by_image(
    const std::vector<Detection>& detections);

/// Fixed-point decimal formatting with round-half-even, e.g.
/// format_fixed(0.81374999, 4) == "0.8137".
std::string format_fixed(double value, int places);

/// Rectangular report table; cells are preformatted strings.
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

enum class TableFormat { csv, markdown };

TableFormat table_format_from_string(const std::string& s);

/// Deterministic serialization: CSV with '.' decimals and LF endings;
/// markdown mirrors the CSV cell for cell.
std::string render_table(const ReportTable& table, TableFormat format);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

/// EvalReport as a table: one row per class plus a final mAP row.
ReportTable report_to_table(const EvalReport& report,
                            const ClassRegistry& classes);

// ---- run configuration ----------------------------------------------------

struct SweepFixture {
  std::vector<std::string> models;
  std::vector<std::vector<double>> cells;  // [threshold][model]
};

struct SweepSection {
  std::vector<double> thresholds = {0.35, 0.4, 0.45, 0.5,
                                    0.55, 0.65, 0.7, 0.75};
  std::optional<SweepFixture> fixture;
};

struct GridFixture {
  std::vector<std::vector<double>> cells;  // [conf][weight]
};

struct GridSection {
  std::vector<ConfStrategy> conf_strategies = {
      ConfStrategy::max, ConfStrategy::avg, ConfStrategy::box_and_model_avg,
      ConfStrategy::absent_model_aware_avg};
  std::vector<WeightStrategy> weight_strategies = {
      WeightStrategy::quality, WeightStrategy::uniform,
      WeightStrategy::rank_linear, WeightStrategy::rank_squared};
  std::optional<GridFixture> fixture;
};

struct SimSection {
  std::vector<SimModelParams> models;
  std::optional<GtGenSpec> generate_gt;
};

/// Everything needed to reproduce a run, serializable as one JSON document.
struct RunConfig {
  EnsembleSpec ensemble;
  double nms_threshold = 0.55;
  double wbf_iou_threshold = 0.5;
  ConfStrategy conf_strategy = ConfStrategy::max;
  WeightStrategy weight_strategy = WeightStrategy::quality;
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::optional<SweepSection> sweep;
  std::optional<GridSection> grid;
  std::optional<SimSection> sim;
};

RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace detfuse
