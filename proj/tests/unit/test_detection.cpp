#include <doctest.h>

#include "detfuse/detection.hpp"

using namespace detfuse;

namespace {

const ClassRegistry kClasses = ClassRegistry::default_weapons();

EnsembleSpec reference_ensemble() {
  return EnsembleSpec{{{"vgg16", 0.814},
                       {"resnet50", 0.743},
                       {"mobilenet", 0.666},
                       {"efficientnet", 0.603}}};
}

}  // namespace

TEST_CASE("validate_detection accepts a clean record") {
  auto d = validate_detection(
      {"img0", "m0", 1, 0.9, {0.1, 0.1, 0.2, 0.2}}, kClasses);
  CHECK(d.class_id == 1);
  CHECK(d.score == 0.9);
}

TEST_CASE("validate_detection clips out-of-range coordinates") {
  auto d = validate_detection(
      {"img0", "m0", 0, 0.9, {-0.05, 0.1, 0.2, 0.2}}, kClasses);
  CHECK(d.box.x1 == 0.0);
}

TEST_CASE("validate_detection rejects bad inputs") {
  CHECK_THROWS_AS(validate_detection({"i", "m", 0, 0.0, {0, 0, 0.5, 0.5}},
                                     kClasses),
                  ValidationError);
  CHECK_THROWS_AS(validate_detection({"i", "m", 0, 1.5, {0, 0, 0.5, 0.5}},
                                     kClasses),
                  ValidationError);
  CHECK_THROWS_AS(validate_detection({"i", "m", 7, 0.5, {0, 0, 0.5, 0.5}},
                                     kClasses),
                  ValidationError);
  // degenerate after clipping: whole box left of the image
  CHECK_THROWS_AS(validate_detection({"i", "m", 0, 0.5, {-0.5, 0, -0.1, 1}},
                                     kClasses),
                  ValidationError);
}

TEST_CASE("resolve_weights: quality passes qualities through") {
  auto r = resolve_weights(WeightStrategy::quality, reference_ensemble());
  CHECK(r.weights.at("vgg16") == 0.814);
  CHECK(r.weights.at("efficientnet") == 0.603);
  CHECK(r.warnings.empty());
}

TEST_CASE("resolve_weights: uniform") {
  auto r = resolve_weights(WeightStrategy::uniform, reference_ensemble());
  for (const auto& [_, w] : r.weights) CHECK(w == 1.0);
}

TEST_CASE("resolve_weights: linear ranks, worst model gets 1") {
  auto r = resolve_weights(WeightStrategy::rank_linear, reference_ensemble());
  CHECK(r.weights.at("efficientnet") == 1.0);
  CHECK(r.weights.at("mobilenet") == 2.0);
  CHECK(r.weights.at("resnet50") == 3.0);
  CHECK(r.weights.at("vgg16") == 4.0);
}

TEST_CASE("resolve_weights: squared ranks") {
  auto r = resolve_weights(WeightStrategy::rank_squared, reference_ensemble());
  CHECK(r.weights.at("efficientnet") == 1.0);
  CHECK(r.weights.at("mobilenet") == 4.0);
  CHECK(r.weights.at("resnet50") == 9.0);
  CHECK(r.weights.at("vgg16") == 16.0);
}

TEST_CASE("resolve_weights: rank ties break by model order with a warning") {
  EnsembleSpec tied{{{"a", 0.7}, {"b", 0.7}, {"c", 0.9}}};
  auto r = resolve_weights(WeightStrategy::rank_linear, tied);
  CHECK(r.weights.at("a") == 1.0);
  CHECK(r.weights.at("b") == 2.0);
  CHECK(r.weights.at("c") == 3.0);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("resolve_weights validates the spec") {
  CHECK_THROWS_AS(resolve_weights(WeightStrategy::uniform, EnsembleSpec{}),
                  ValidationError);
  EnsembleSpec dup{{{"a", 0.5}, {"a", 0.6}}};
  CHECK_THROWS_AS(resolve_weights(WeightStrategy::uniform, dup),
                  ValidationError);
  EnsembleSpec nonpos{{{"a", 0.0}}};
  CHECK_THROWS_AS(resolve_weights(WeightStrategy::quality, nonpos),
                  ValidationError);
}
