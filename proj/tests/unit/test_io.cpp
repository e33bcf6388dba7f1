#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "detfuse/io.hpp"

using namespace detfuse;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& content) {
    path = fs::temp_directory_path() / name;
    std::ofstream(path, std::ios::binary) << content;
  }
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const ClassRegistry kClasses = ClassRegistry::default_weapons();

}  // namespace

TEST_CASE("format_fixed") {
  CHECK(format_fixed(0.81374999, 4) == "0.8137");
  CHECK(format_fixed(0.8137, 4) == "0.8137");
  CHECK(format_fixed(0.5, 2) == "0.50");
  CHECK(format_fixed(1.0, 4) == "1.0000");
  CHECK(format_fixed(-0.25, 2) == "-0.25");
  CHECK(format_fixed(0.0, 4) == "0.0000");
  // ties go to even
  CHECK(format_fixed(0.125, 2) == "0.12");
  CHECK(format_fixed(0.375, 2) == "0.38");
}

TEST_CASE("load_detections: empty file, normalized record, pixel record") {
  TempFile empty("det_empty.jsonl", "");
  CHECK(load_detections(empty.path, kClasses).empty());

  TempFile one("det_one.jsonl",
               R"({"image_id":"i","model_id":"m","class_id":0,"score":0.9,)"
               R"("bbox":[0.1,0.1,0.2,0.2],"coord_mode":"normalized"})"
               "\n");
  auto dets = load_detections(one.path, kClasses);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].box.x2 == 0.2);

  TempFile pixel("det_pixel.jsonl",
                 R"({"image_id":"i","model_id":"m","class_id":0,"score":0.9,)"
                 R"("bbox":[10,10,20,20],"coord_mode":"pixel",)"
                 R"("image_w":100,"image_h":100})"
                 "\n");
  auto pdets = load_detections(pixel.path, kClasses);
  REQUIRE(pdets.size() == 1);
  CHECK(pdets[0].box == BoundingBox{0.1, 0.1, 0.2, 0.2});
}

TEST_CASE("load_detections: strict aborts, lenient counts and skips") {
  const std::string good =
      R"({"image_id":"i","model_id":"m","class_id":0,"score":0.9,)"
      R"("bbox":[0.1,0.1,0.2,0.2]})";
  const std::string bad_score =
      R"({"image_id":"i","model_id":"m","class_id":0,"score":0.0,)"
      R"("bbox":[0.1,0.1,0.2,0.2]})";
  const std::string no_dims =
      R"({"image_id":"i","model_id":"m","class_id":0,"score":0.9,)"
      R"("bbox":[10,10,20,20],"coord_mode":"pixel"})";
  TempFile f("det_mixed.jsonl",
             good + "\nnot json\n" + bad_score + "\n" + no_dims + "\n");

  CHECK_THROWS_AS(load_detections(f.path, kClasses, LoadMode::strict),
                  ValidationError);

  LoadDiagnostics diag;
  auto dets = load_detections(f.path, kClasses, LoadMode::lenient, &diag);
  CHECK(dets.size() == 1);
  CHECK(diag.rejected == 3);
  CHECK(diag.messages.size() == 3);
}

TEST_CASE("load_detections: missing file is an IoError") {
  CHECK_THROWS_AS(load_detections("/nonexistent/x.jsonl", kClasses), IoError);
}

TEST_CASE("detections round-trip through the JSONL writer") {
  std::vector<Detection> dets = {
      {"img a", "m\"1", 2, 0.912345678, {0.1, 0.25, 0.875, 0.999999999}},
      {"b", "m2", 0, 0.5, {0.0, 0.0, 1.0, 1.0}}};
  const fs::path p = fs::temp_directory_path() / "rt.jsonl";
  write_detections(p, dets);
  auto back = load_detections(p, kClasses);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].image_id == dets[i].image_id);
    CHECK(back[i].model_id == dets[i].model_id);
    CHECK(back[i].class_id == dets[i].class_id);
    CHECK(back[i].score == doctest::Approx(dets[i].score).epsilon(1e-9));
    CHECK(back[i].box.x1 == doctest::Approx(dets[i].box.x1).epsilon(1e-9));
    CHECK(back[i].box.y2 == doctest::Approx(dets[i].box.y2).epsilon(1e-9));
  }
  // byte-identical rewrite
  const std::string first = slurp(p);
  write_detections(p, back);
  CHECK(slurp(p) == first);
  fs::remove(p);
}

TEST_CASE("ground truth loader rejects what detection loading rejects") {
  TempFile f("gt.jsonl",
             R"({"image_id":"i","class_id":1,"bbox":[0.1,0.1,0.2,0.2]})"
             "\n"
             R"({"image_id":"i","class_id":9,"bbox":[0.1,0.1,0.2,0.2]})"
             "\n");
  LoadDiagnostics diag;
  auto gt = load_ground_truth(f.path, kClasses, LoadMode::lenient, &diag);
  CHECK(gt.size() == 1);
  CHECK(diag.rejected == 1);
}

TEST_CASE("render_table: csv and markdown mirror each other") {
  ReportTable t;
  t.header = {"nms_threshold", "vgg16"};
  t.rows = {{"0.55", "0.8137"}};
  CHECK(render_table(t, TableFormat::csv) ==
        "nms_threshold,vgg16\n0.55,0.8137\n");
  CHECK(render_table(t, TableFormat::markdown) ==
        "| nms_threshold | vgg16 |\n| --- | --- |\n| 0.55 | 0.8137 |\n");
}

TEST_CASE("render_table: empty report is header-only") {
  ReportTable t;
  t.header = {"a", "b"};
  CHECK(render_table(t, TableFormat::csv) == "a,b\n");
}

TEST_CASE("run config round-trips through JSON") {
  RunConfig cfg;
  cfg.ensemble.profiles = {{"vgg16", 0.814}, {"resnet50", 0.743}};
  cfg.nms_threshold = 0.6;
  cfg.conf_strategy = ConfStrategy::avg;
  cfg.weight_strategy = WeightStrategy::rank_squared;
  cfg.eval.interpolation = Interpolation::eleven_point;
  cfg.seed = 7;
  cfg.sweep = SweepSection{};
  cfg.sweep->fixture = SweepFixture{{"a", "b"}, {{0.1, 0.2}}};
  cfg.sweep->thresholds = {0.5};
  cfg.sim = SimSection{};
  cfg.sim->models.push_back(SimModelParams{"a"});
  cfg.sim->generate_gt = GtGenSpec{10, 1, 2, 3, 0};

  const fs::path p = fs::temp_directory_path() / "cfg.json";
  write_text_file(p, run_config_to_json(cfg));
  auto back = load_run_config(p);
  CHECK(back.ensemble.profiles.size() == 2);
  CHECK(back.nms_threshold == 0.6);
  CHECK(back.conf_strategy == ConfStrategy::avg);
  CHECK(back.weight_strategy == WeightStrategy::rank_squared);
  CHECK(back.eval.interpolation == Interpolation::eleven_point);
  CHECK(back.seed == 7);
  REQUIRE(back.sweep.has_value());
  REQUIRE(back.sweep->fixture.has_value());
  CHECK(back.sweep->fixture->cells[0][1] == 0.2);
  REQUIRE(back.sim.has_value());
  CHECK(back.sim->generate_gt->num_images == 10);
  fs::remove(p);
}
