#include "detfuse/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace detfuse {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string quote(const std::string& s) { return json(s).dump(); }

struct ParsedRecord {
  RawDetection raw;
  bool has_model = false;
  bool has_score = false;
};

// Shared parser for detection and ground-truth lines.
ParsedRecord parse_record(const json& j, bool expect_model_and_score) {
  ParsedRecord rec;
  rec.raw.image_id = j.at("image_id").get<std::string>();
  rec.raw.class_id = j.at("class_id").get<int>();
  if (expect_model_and_score) {
    rec.raw.model_id = j.at("model_id").get<std::string>();
    rec.raw.score = j.at("score").get<double>();
    rec.has_model = rec.has_score = true;
  }
  const auto& bbox = j.at("bbox");
  if (!bbox.is_array() || bbox.size() != 4) {
    throw ValidationError("bbox must be a 4-element array");
  }
  BoundingBox b{bbox[0].get<double>(), bbox[1].get<double>(),
                bbox[2].get<double>(), bbox[3].get<double>()};

  const std::string mode = j.value("coord_mode", "normalized");
  if (mode == "pixel") {
    if (!j.contains("image_w") || !j.contains("image_h")) {
      throw ValidationError("pixel mode requires image_w and image_h");
    }
    const double w = j.at("image_w").get<double>();
    const double h = j.at("image_h").get<double>();
    if (w <= 0 || h <= 0) {
      throw ValidationError("image_w/image_h must be positive");
    }
    b.x1 /= w;
    b.x2 /= w;
    b.y1 /= h;
    b.y2 /= h;
  } else if (mode != "normalized") {
    throw ValidationError("unknown coord_mode '" + mode + "'");
  }
  rec.raw.box = b;
  return rec;
}

template <typename Out, typename PerLine>
std::vector<Out> load_jsonl(const std::filesystem::path& path, LoadMode mode,
                            LoadDiagnostics* diag, PerLine&& per_line) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<Out> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed line: ") + e.what());
      }
      out.push_back(per_line(j));
      if (diag) ++diag->accepted;
    } catch (const ValidationError& e) {
      const std::string msg =
          "line " + std::to_string(line_no) + ": " + e.what();
      if (mode == LoadMode::strict) throw ValidationError(msg);
      if (diag) {
        ++diag->rejected;
        diag->messages.push_back(msg);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       const ClassRegistry& classes,
                                       LoadMode mode, LoadDiagnostics* diag) {
  return load_jsonl<Detection>(path, mode, diag, [&](const json& j) {
    return validate_detection(parse_record(j, true).raw, classes);
  });
}

std::vector<GroundTruthBox> load_ground_truth(
    const std::filesystem::path& path, const ClassRegistry& classes,
    LoadMode mode, LoadDiagnostics* diag) {
  return load_jsonl<GroundTruthBox>(path, mode, diag, [&](const json& j) {
    auto rec = parse_record(j, false);
    if (!classes.contains(rec.raw.class_id)) {
      throw ValidationError("unknown class id " +
                            std::to_string(rec.raw.class_id));
    }
    const BoundingBox box = clip_to_unit(rec.raw.box);
    if (!box.valid()) {
      throw ValidationError("degenerate bounding box after clipping");
    }
    return GroundTruthBox{rec.raw.image_id, rec.raw.class_id, box};
  });
}

void write_detections(const std::filesystem::path& path,
                      const std::vector<Detection>& detections) {
  std::ostringstream os;
  for (const auto& d : detections) {
    os << "{\"image_id\":" << quote(d.image_id)
       << ",\"model_id\":" << quote(d.model_id)
       << ",\"class_id\":" << d.class_id
       << ",\"score\":" << format_fixed(d.score, 9) << ",\"bbox\":["
       << format_fixed(d.box.x1, 9) << "," << format_fixed(d.box.y1, 9) << ","
       << format_fixed(d.box.x2, 9) << "," << format_fixed(d.box.y2, 9)
       << "],\"coord_mode\":\"normalized\"}\n";
  }
  write_text_file(path, os.str());
}

void write_fused(const std::filesystem::path& path,
                 const std::vector<FusedDetection>& fused) {
  std::ostringstream os;
  for (const auto& f : fused) {
    os << "{\"image_id\":" << quote(f.image_id)
       << ",\"model_id\":\"ensemble\",\"class_id\":" << f.class_id
       << ",\"score\":" << format_fixed(f.score, 9) << ",\"bbox\":["
       << format_fixed(f.box.x1, 9) << "," << format_fixed(f.box.y1, 9) << ","
       << format_fixed(f.box.x2, 9) << "," << format_fixed(f.box.y2, 9)
       << "],\"coord_mode\":\"normalized\",\"support\":" << f.support
       << ",\"models\":[";
    bool first = true;
    for (const auto& m : f.model_ids) {
      if (!first) os << ",";
      os << quote(m);
      first = false;
    }
    os << "]}\n";
  }
  write_text_file(path, os.str());
}

std::map<std::string, std::vector<Detection>> group_by_model(
    const std::vector<Detection>& detections) {
  std::map<std::string, std::vector<Detection>> out;
  for (const auto& d : detections) out[d.model_id].push_back(d);
  return out;
}

std::map<std::string, std::vector<Detection>> group_by_image(
    const std::vector<Detection>& detections) {
  std::map<std::string, std::vector<Detection>> out;
  for (const auto& d : detections) out[d.image_id].push_back(d);
  return out;
}

std::string format_fixed(double value, int places) {
  unsigned long long scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  // llrint honors the default FE_TONEAREST mode, i.e. ties to even.
  long long n = std::llrint(value * static_cast<double>(scale));
  const bool neg = n < 0;
  unsigned long long mag = neg ? static_cast<unsigned long long>(-n)
                               : static_cast<unsigned long long>(n);
  std::string frac = std::to_string(mag % scale);
  frac.insert(frac.begin(), places - frac.size(), '0');
  std::string out = neg ? "-" : "";
  out += std::to_string(mag / scale);
  if (places > 0) out += "." + frac;
  return out;
}

TableFormat table_format_from_string(const std::string& s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "markdown" || s == "md") return TableFormat::markdown;
  throw ValidationError("unknown table format: " + s);
}

std::string render_table(const ReportTable& table, TableFormat format) {
  std::ostringstream os;
  if (format == TableFormat::csv) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (i) os << ",";
      os << table.header[i];
    }
    os << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ",";
        os << row[i];
      }
      os << "\n";
    }
  } else {
    os << "|";
    for (const auto& h : table.header) os << " " << h << " |";
    os << "\n|";
    for (std::size_t i = 0; i < table.header.size(); ++i) os << " --- |";
    os << "\n";
    for (const auto& row : table.rows) {
      os << "|";
      for (const auto& cell : row) os << " " << cell << " |";
      os << "\n";
    }
  }
  return os.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

ReportTable report_to_table(const EvalReport& report,
                            const ClassRegistry& classes) {
  ReportTable t;
  t.header = {"class", "ap", "tp", "fp", "fn", "num_gt"};
  for (const auto& [cls, r] : report.per_class) {
    const std::string name =
        classes.contains(cls) ? classes.name(cls) : std::to_string(cls);
    t.rows.push_back({name, format_fixed(r.ap, 4), std::to_string(r.tp),
                      std::to_string(r.fp), std::to_string(r.fn),
                      std::to_string(r.num_gt)});
  }
  t.rows.push_back({"mAP", format_fixed(report.map, 4), "", "", "", ""});
  return t;
}

// ---- run configuration ----------------------------------------------------

namespace {

std::vector<std::vector<double>> parse_cells(const json& j) {
  std::vector<std::vector<double>> cells;
  for (const auto& row : j) cells.push_back(row.get<std::vector<double>>());
  return cells;
}

SimModelParams parse_sim_model(const json& j) {
  SimModelParams m;
  m.model_id = j.at("model_id").get<std::string>();
  m.detect_prob = j.value("detect_prob", m.detect_prob);
  m.jitter_sigma = j.value("jitter_sigma", m.jitter_sigma);
  m.tp_score_mean = j.value("tp_score_mean", m.tp_score_mean);
  m.tp_score_spread = j.value("tp_score_spread", m.tp_score_spread);
  m.fp_rate = j.value("fp_rate", m.fp_rate);
  m.fp_score_mean = j.value("fp_score_mean", m.fp_score_mean);
  m.fp_score_spread = j.value("fp_score_spread", m.fp_score_spread);
  if (m.detect_prob < 0.0 || m.detect_prob > 1.0 || m.jitter_sigma < 0.0 ||
      m.fp_rate < 0.0) {
    throw ValidationError("invalid simulator parameters for model '" +
                          m.model_id + "'");
  }
  return m;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config parse error: " + std::string(e.what()));
  }

  RunConfig cfg;
  // A bare {"models": [...]} document is accepted as an ensemble spec.
  if (j.contains("ensemble") || j.contains("models")) {
    const json& ens = j.contains("ensemble") ? j["ensemble"] : j;
    for (const auto& m : ens.at("models")) {
      cfg.ensemble.profiles.push_back(ModelProfile{
          m.at("model_id").get<std::string>(), m.at("quality").get<double>()});
    }
  }
  cfg.nms_threshold = j.value("nms_threshold", cfg.nms_threshold);
  cfg.wbf_iou_threshold = j.value("wbf_iou_threshold", cfg.wbf_iou_threshold);
  if (j.contains("conf_strategy"))
    cfg.conf_strategy = conf_strategy_from_string(j["conf_strategy"]);
  if (j.contains("weight_strategy"))
    cfg.weight_strategy = weight_strategy_from_string(j["weight_strategy"]);
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    cfg.eval.iou_threshold = e.value("iou_threshold", cfg.eval.iou_threshold);
    if (e.contains("interpolation"))
      cfg.eval.interpolation = interpolation_from_string(e["interpolation"]);
  }
  cfg.seed = j.value("seed", cfg.seed);

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    SweepSection sweep;
    if (s.contains("thresholds"))
      sweep.thresholds = s["thresholds"].get<std::vector<double>>();
    if (s.contains("fixture")) {
      SweepFixture f;
      f.models = s["fixture"].at("models").get<std::vector<std::string>>();
      f.cells = parse_cells(s["fixture"].at("cells"));
      sweep.fixture = std::move(f);
    }
    cfg.sweep = std::move(sweep);
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    GridSection grid;
    if (g.contains("conf_strategies")) {
      grid.conf_strategies.clear();
      for (const auto& s : g["conf_strategies"])
        grid.conf_strategies.push_back(conf_strategy_from_string(s));
    }
    if (g.contains("weight_strategies")) {
      grid.weight_strategies.clear();
      for (const auto& s : g["weight_strategies"])
        grid.weight_strategies.push_back(weight_strategy_from_string(s));
    }
    if (g.contains("fixture")) {
      grid.fixture = GridFixture{parse_cells(g["fixture"].at("cells"))};
    }
    cfg.grid = std::move(grid);
  }
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    SimSection sim;
    for (const auto& m : s.at("models"))
      sim.models.push_back(parse_sim_model(m));
    if (s.contains("generate_gt")) {
      const auto& g = s["generate_gt"];
      GtGenSpec gen;
      gen.num_images = g.value("num_images", gen.num_images);
      gen.min_boxes_per_image =
          g.value("min_boxes_per_image", gen.min_boxes_per_image);
      gen.max_boxes_per_image =
          g.value("max_boxes_per_image", gen.max_boxes_per_image);
      gen.num_classes = g.value("num_classes", gen.num_classes);
      sim.generate_gt = gen;
    }
    cfg.sim = std::move(sim);
  }
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  ordered_json models = ordered_json::array();
  for (const auto& p : cfg.ensemble.profiles) {
    models.push_back({{"model_id", p.model_id}, {"quality", p.quality}});
  }
  j["ensemble"] = {{"models", models}};
  j["nms_threshold"] = cfg.nms_threshold;
  j["wbf_iou_threshold"] = cfg.wbf_iou_threshold;
  j["conf_strategy"] = to_string(cfg.conf_strategy);
  j["weight_strategy"] = to_string(cfg.weight_strategy);
  j["eval"] = {{"iou_threshold", cfg.eval.iou_threshold},
               {"interpolation", to_string(cfg.eval.interpolation)}};
  j["seed"] = cfg.seed;
  if (cfg.sweep) {
    ordered_json s;
    s["thresholds"] = cfg.sweep->thresholds;
    if (cfg.sweep->fixture) {
      s["fixture"] = {{"models", cfg.sweep->fixture->models},
                      {"cells", cfg.sweep->fixture->cells}};
    }
    j["sweep"] = std::move(s);
  }
  if (cfg.grid) {
    ordered_json g;
    ordered_json conf = ordered_json::array();
    for (auto c : cfg.grid->conf_strategies) conf.push_back(to_string(c));
    ordered_json ws = ordered_json::array();
    for (auto w : cfg.grid->weight_strategies) ws.push_back(to_string(w));
    g["conf_strategies"] = std::move(conf);
    g["weight_strategies"] = std::move(ws);
    if (cfg.grid->fixture) {
      g["fixture"] = {{"cells", cfg.grid->fixture->cells}};
    }
    j["grid"] = std::move(g);
  }
  if (cfg.sim) {
    ordered_json s;
    ordered_json sm = ordered_json::array();
    for (const auto& m : cfg.sim->models) {
      sm.push_back({{"model_id", m.model_id},
                    {"detect_prob", m.detect_prob},
                    {"jitter_sigma", m.jitter_sigma},
                    {"tp_score_mean", m.tp_score_mean},
                    {"tp_score_spread", m.tp_score_spread},
                    {"fp_rate", m.fp_rate},
                    {"fp_score_mean", m.fp_score_mean},
                    {"fp_score_spread", m.fp_score_spread}});
    }
    s["models"] = std::move(sm);
    if (cfg.sim->generate_gt) {
      const auto& g = *cfg.sim->generate_gt;
      s["generate_gt"] = {{"num_images", g.num_images},
                          {"min_boxes_per_image", g.min_boxes_per_image},
                          {"max_boxes_per_image", g.max_boxes_per_image},
                          {"num_classes", g.num_classes}};
    }
    j["sim"] = std::move(s);
  }
  return j.dump(2) + "\n";
}

}  // namespace detfuse
