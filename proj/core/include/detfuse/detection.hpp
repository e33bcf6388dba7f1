#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "detfuse/geometry.hpp"

namespace detfuse {

/// Raised when an input record or argument violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense class-id -> name mapping. Ids run 0..size()-1.
struct ClassRegistry {
  std::vector<std::string> names;

  bool contains(int id) const {
    return id >= 0 && id < static_cast<int>(names.size());
  }
  const std::string& name(int id) const { return names.at(id); }

  /// Default three-class weapon mapping: 0=gun, 1=heavy_weapon, 2=knife.
  static ClassRegistry default_weapons() {
    return ClassRegistry{{"gun", "heavy_weapon", "knife"}};
  }
};

/// One model's single prediction on one image.
struct Detection {
  std::string image_id;
  std::string model_id;
  int class_id = 0;
  double score = 0.0;  // in (0, 1]
  BoundingBox box;
};

/// A model identity plus the standalone quality scalar (typically its mAP)
/// used to derive fusion weights.
struct ModelProfile {
  std::string model_id;
  double quality = 0.0;  // > 0
};

/// Ordered set of models forming an ensemble. The ordering is the canonical
/// model ordering for all tie-breaking.
struct EnsembleSpec {
  std::vector<ModelProfile> profiles;

  std::size_t size() const { return profiles.size(); }

  /// Index in canonical order, or -1 if the model is not in the ensemble.
  int index_of(const std::string& model_id) const {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      if (profiles[i].model_id == model_id) return static_cast<int>(i);
    }
    return -1;
  }

  /// Throws ValidationError on empty spec, non-positive quality, or a
  /// duplicated model id.
  void validate() const;
};

enum class WeightStrategy { quality, uniform, rank_linear, rank_squared };

const char* to_string(WeightStrategy s);
WeightStrategy weight_strategy_from_string(const std::string& s);

struct WeightResolution {
  std::map<std::string, double> weights;
  std::vector<std::string> warnings;  // e.g. rank ties broken by model order
};

/// Maps every ensemble model to a strictly positive fusion weight.
///   quality      -> the model's quality scalar as-is
///   uniform      -> 1.0 for every model
///   rank_linear  -> ranks 1..n by ascending quality (worst model gets 1)
///   rank_squared -> rank_linear squared
/// Quality ties under the rank strategies are broken by canonical model
/// order (earlier model gets the lower rank) and reported as a warning.
WeightResolution resolve_weights(WeightStrategy strategy,
                                 const EnsembleSpec& spec);

/// Wire-form detection record before validation.
struct RawDetection {
  std::string image_id;
  std::string model_id;
  int class_id = 0;
  double score = 0.0;
  BoundingBox box;
};

/// Clips coordinates into [0,1], then enforces every Detection invariant.
/// Throws ValidationError on a degenerate box after clipping, a score
/// outside (0,1], or a class id unknown to the registry.
Detection validate_detection(const RawDetection& raw,
                             const ClassRegistry& classes);

}  // namespace detfuse
