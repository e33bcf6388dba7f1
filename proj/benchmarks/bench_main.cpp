#include <benchmark/benchmark.h>

#include "detfuse/harness.hpp"
#include "detfuse/rng.hpp"

using namespace detfuse;

namespace {

std::vector<Detection> random_batch(int n, std::uint64_t seed,
                                    const std::string& model = "m") {
  Rng rng(seed);
  std::vector<Detection> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double w = rng.uniform(0.05, 0.3);
    const double h = rng.uniform(0.05, 0.3);
    const double x1 = rng.uniform(0.0, 1.0 - w);
    const double y1 = rng.uniform(0.0, 1.0 - h);
    out.push_back(Detection{"img", model, static_cast<int>(rng.uniform() * 3),
                            rng.uniform(0.05, 1.0),
                            {x1, y1, x1 + w, y1 + h}});
  }
  return out;
}

void BM_Iou(benchmark::State& state) {
  auto batch = random_batch(2, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(batch[0].box, batch[1].box));
  }
}
BENCHMARK(BM_Iou);

void BM_Nms(benchmark::State& state) {
  auto batch = random_batch(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nms(batch, NmsConfig{0.55}));
  }
}
BENCHMARK(BM_Nms)->Arg(64)->Arg(256)->Arg(1024);

void BM_Wbf(benchmark::State& state) {
  EnsembleSpec spec{{{"a", 0.8}, {"b", 0.7}, {"c", 0.6}}};
  std::vector<Detection> pooled;
  for (int m = 0; m < 3; ++m) {
    auto batch = random_batch(static_cast<int>(state.range(0)) / 3, 10 + m,
                              std::string(1, 'a' + m));
    pooled.insert(pooled.end(), batch.begin(), batch.end());
  }
  FusionConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_boxes_fusion(pooled, cfg, spec));
  }
}
BENCHMARK(BM_Wbf)->Arg(48)->Arg(192)->Arg(768);

void BM_Map(benchmark::State& state) {
  GtGenSpec gen;
  gen.num_images = static_cast<int>(state.range(0));
  gen.seed = 3;
  auto truth = generate_ground_truth(gen);
  SimSpec sim;
  sim.models = {SimModelParams{"m", 0.9, 0.02, 0.8, 0.1, 0.5, 0.3, 0.1}};
  sim.seed = 4;
  auto dets = simulate_detectors(truth, sim);
  EvalConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_average_precision(dets, truth, cfg));
  }
}
BENCHMARK(BM_Map)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
