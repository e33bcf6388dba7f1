#include <doctest.h>

#include "detfuse/harness.hpp"

using namespace detfuse;

namespace {

Detection det(const std::string& model, double score, BoundingBox box,
              int cls = 0, const std::string& image = "img") {
  return Detection{image, model, cls, score, box};
}

GroundTruthBox gt(BoundingBox box, int cls = 0,
                  const std::string& image = "img") {
  return GroundTruthBox{image, cls, box};
}

}  // namespace

TEST_CASE("analyze_sweep picks the arg-max of the cross-model average") {
  SweepTable t;
  t.thresholds = {0.4, 0.5, 0.6};
  t.models = {"a", "b"};
  t.cells = {{0.5, 0.5}, {0.9, 0.2}, {0.6, 0.6}};
  auto out = analyze_sweep(t);
  CHECK(out.selected_threshold == 0.6);
  CHECK(out.average_per_threshold[2] == doctest::Approx(0.6));
  CHECK(out.best_threshold_per_model.at("a") == 0.5);
  CHECK(out.best_threshold_per_model.at("b") == 0.6);
}

TEST_CASE("analyze_sweep ties resolve to the lower threshold") {
  SweepTable t;
  t.thresholds = {0.4, 0.5};
  t.models = {"a"};
  t.cells = {{0.7}, {0.7}};
  CHECK(analyze_sweep(t).selected_threshold == 0.4);
}

TEST_CASE("analyze_sweep validates its inputs") {
  SweepTable t;
  t.thresholds = {0.5, 0.4};
  t.models = {"a"};
  t.cells = {{0.7}, {0.7}};
  CHECK_THROWS_AS(analyze_sweep(t), ValidationError);  // not increasing
  t.thresholds = {0.4, 0.5};
  t.cells = {{0.7}};
  CHECK_THROWS_AS(analyze_sweep(t), ValidationError);  // row mismatch
}

TEST_CASE("run_nms_sweep: perfect detections give a 1.0 cell") {
  SweepSpec spec;
  spec.thresholds = {0.5};
  spec.ground_truth = {gt({0.1, 0.1, 0.4, 0.4})};
  spec.per_model["m"] = {det("m", 0.9, {0.1, 0.1, 0.4, 0.4})};
  auto out = run_nms_sweep(spec);
  CHECK(out.table.cells[0][0] == doctest::Approx(1.0));
  CHECK(out.selected_threshold == 0.5);
}

TEST_CASE("run_nms_sweep: no same-class overlap means threshold-independent mAP") {
  SweepSpec spec;
  spec.thresholds = {0.35, 0.55, 0.75};
  spec.ground_truth = {gt({0.1, 0.1, 0.3, 0.3}), gt({0.6, 0.6, 0.9, 0.9})};
  spec.per_model["m"] = {det("m", 0.9, {0.1, 0.1, 0.3, 0.3}),
                         det("m", 0.4, {0.62, 0.6, 0.9, 0.9})};
  auto out = run_nms_sweep(spec);
  CHECK(out.table.cells[0][0] == out.table.cells[1][0]);
  CHECK(out.table.cells[1][0] == out.table.cells[2][0]);
}

TEST_CASE("analyze_grid summarizes the fixture best cell") {
  GridTable t;
  t.conf_strategies = {ConfStrategy::max, ConfStrategy::avg};
  t.weight_strategies = {WeightStrategy::quality, WeightStrategy::uniform};
  t.cells = {{0.838, 0.833}, {0.740, 0.732}};
  auto out = analyze_grid(t, "vgg16", 0.814);
  CHECK(out.best_conf == ConfStrategy::max);
  CHECK(out.best_weight == WeightStrategy::quality);
  CHECK(out.best_map == 0.838);
  CHECK(out.relative_improvement_pct ==
        doctest::Approx(2.948).epsilon(3e-4));
}

TEST_CASE("run_wbf_grid: single-model ensemble cell equals standalone mAP") {
  GridSpec spec;
  spec.conf_strategies = {ConfStrategy::max};
  spec.weight_strategies = {WeightStrategy::uniform};
  spec.ensemble.profiles = {{"m", 1.0}};
  spec.ground_truth = {gt({0.1, 0.1, 0.4, 0.4}), gt({0.6, 0.6, 0.9, 0.9})};
  spec.per_model["m"] = {det("m", 0.9, {0.1, 0.1, 0.4, 0.4}),
                         det("m", 0.8, {0.6, 0.6, 0.8, 0.8})};
  auto out = run_wbf_grid(spec);
  CHECK(out.table.cells[0][0] == doctest::Approx(out.best_single_map));
  CHECK(out.best_single_model == "m");
}

TEST_CASE("run_wbf_grid: duplicated detector fused with avg keeps its mAP") {
  GridSpec spec;
  spec.conf_strategies = {ConfStrategy::avg,
                          ConfStrategy::absent_model_aware_avg};
  spec.weight_strategies = {WeightStrategy::uniform};
  spec.ensemble.profiles = {{"a", 0.8}, {"b", 0.8}};
  spec.ground_truth = {gt({0.1, 0.1, 0.4, 0.4}), gt({0.6, 0.6, 0.9, 0.9})};
  std::vector<Detection> base = {det("a", 0.9, {0.1, 0.1, 0.4, 0.4}),
                                 det("a", 0.8, {0.58, 0.58, 0.88, 0.88}),
                                 det("a", 0.3, {0.3, 0.6, 0.5, 0.8})};
  spec.per_model["a"] = base;
  for (auto d : base) {
    d.model_id = "b";
    spec.per_model["b"].push_back(d);
  }
  auto out = run_wbf_grid(spec);
  CHECK(out.table.cells[0][0] == doctest::Approx(out.best_single_map));
  CHECK(out.table.cells[1][0] == doctest::Approx(out.best_single_map));
}

TEST_CASE("run_wbf_grid requires detections for every ensemble model") {
  GridSpec spec;
  spec.conf_strategies = {ConfStrategy::max};
  spec.weight_strategies = {WeightStrategy::uniform};
  spec.ensemble.profiles = {{"a", 1.0}, {"b", 1.0}};
  spec.per_model["a"] = {};
  spec.ground_truth = {gt({0.1, 0.1, 0.4, 0.4})};
  CHECK_THROWS_AS(run_wbf_grid(spec), ValidationError);
}

TEST_CASE("generate_ground_truth is seed-deterministic and valid") {
  GtGenSpec spec;
  spec.num_images = 20;
  spec.seed = 9;
  auto a = generate_ground_truth(spec);
  auto b = generate_ground_truth(spec);
  REQUIRE(a.size() == b.size());
  CHECK(!a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].image_id == b[i].image_id);
    CHECK(a[i].box == b[i].box);
    CHECK(a[i].box.valid());
    CHECK(a[i].class_id >= 0);
    CHECK(a[i].class_id < 3);
  }
}

TEST_CASE("simulate_detectors: perfect detector echoes the ground truth") {
  GtGenSpec gen;
  gen.num_images = 10;
  gen.seed = 3;
  auto truth = generate_ground_truth(gen);
  SimSpec sim;
  sim.models = {SimModelParams{"m", 1.0, 0.0, 0.9, 0.0, 0.0, 0.3, 0.0}};
  sim.seed = 5;
  auto dets = simulate_detectors(truth, sim);
  REQUIRE(dets.size() == truth.size());
  auto report = mean_average_precision(dets, truth, EvalConfig{});
  CHECK(report.map == doctest::Approx(1.0));
}

TEST_CASE("simulate_detectors: dead detector emits nothing, mAP 0") {
  GtGenSpec gen;
  gen.num_images = 5;
  gen.seed = 3;
  auto truth = generate_ground_truth(gen);
  SimSpec sim;
  sim.models = {SimModelParams{"m", 0.0, 0.0, 0.9, 0.0, 0.0, 0.3, 0.0}};
  auto dets = simulate_detectors(truth, sim);
  CHECK(dets.empty());
  CHECK(mean_average_precision(dets, truth, EvalConfig{}).map == 0.0);
}

TEST_CASE("simulate_detectors: noisy run is reproducible and imperfect") {
  GtGenSpec gen;
  gen.num_images = 50;
  gen.seed = 11;
  auto truth = generate_ground_truth(gen);
  SimSpec sim;
  sim.models = {SimModelParams{"m", 0.9, 0.02, 0.8, 0.1, 0.5, 0.3, 0.1}};
  sim.seed = 42;
  auto a = simulate_detectors(truth, sim);
  auto b = simulate_detectors(truth, sim);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].score == b[i].score);
    CHECK(a[i].box == b[i].box);
  }
  const double map = mean_average_precision(a, truth, EvalConfig{}).map;
  CHECK(map > 0.0);
  CHECK(map < 1.0);
  for (const auto& d : a) {
    CHECK(d.box.valid());
    CHECK(d.score > 0.0);
    CHECK(d.score <= 1.0);
  }
}
