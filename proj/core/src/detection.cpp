#include "detfuse/detection.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace detfuse {

const char* to_string(WeightStrategy s) {
  switch (s) {
    case WeightStrategy::quality: return "quality";
    case WeightStrategy::uniform: return "uniform";
    case WeightStrategy::rank_linear: return "rank_linear";
    case WeightStrategy::rank_squared: return "rank_squared";
  }
  return "?";
}

WeightStrategy weight_strategy_from_string(const std::string& s) {
  if (s == "quality") return WeightStrategy::quality;
  if (s == "uniform") return WeightStrategy::uniform;
  if (s == "rank_linear") return WeightStrategy::rank_linear;
  if (s == "rank_squared") return WeightStrategy::rank_squared;
  throw ValidationError("unknown weight strategy: " + s);
}

void EnsembleSpec::validate() const {
  if (profiles.empty()) throw ValidationError("ensemble spec is empty");
  std::set<std::string> seen;
  for (const auto& p : profiles) {
    if (p.quality <= 0.0) {
      throw ValidationError("model '" + p.model_id +
                            "' has non-positive quality");
    }
    if (!seen.insert(p.model_id).second) {
      throw ValidationError("duplicate model id '" + p.model_id + "'");
    }
  }
}

WeightResolution resolve_weights(WeightStrategy strategy,
                                 const EnsembleSpec& spec) {
  spec.validate();
  WeightResolution out;
  const std::size_t n = spec.profiles.size();

  switch (strategy) {
    case WeightStrategy::quality:
      for (const auto& p : spec.profiles) out.weights[p.model_id] = p.quality;
      break;
    case WeightStrategy::uniform:
      for (const auto& p : spec.profiles) out.weights[p.model_id] = 1.0;
      break;
    case WeightStrategy::rank_linear:
    case WeightStrategy::rank_squared: {
      // Ascending quality: worst model gets rank 1, best gets rank n.
      // Ties break toward canonical order (earlier model -> lower rank).
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a,
                                                   std::size_t b) {
        return spec.profiles[a].quality < spec.profiles[b].quality;
      });
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (spec.profiles[idx[i]].quality == spec.profiles[idx[i + 1]].quality) {
          out.warnings.push_back(
              "quality tie between '" + spec.profiles[idx[i]].model_id +
              "' and '" + spec.profiles[idx[i + 1]].model_id +
              "'; ranks assigned by model order");
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double rank = static_cast<double>(i + 1);
        out.weights[spec.profiles[idx[i]].model_id] =
            strategy == WeightStrategy::rank_linear ? rank : rank * rank;
      }
      break;
    }
  }
  return out;
}

Detection validate_detection(const RawDetection& raw,
                             const ClassRegistry& classes) {
  if (!(raw.score > 0.0) || raw.score > 1.0) {
    throw ValidationError("non-positive score or score > 1 (got " +
                          std::to_string(raw.score) + ")");
  }
  if (!classes.contains(raw.class_id)) {
    throw ValidationError("unknown class id " + std::to_string(raw.class_id));
  }
  const BoundingBox box = clip_to_unit(raw.box);
  if (!box.valid()) {
    throw ValidationError("degenerate bounding box after clipping");
  }
  return Detection{raw.image_id, raw.model_id, raw.class_id, raw.score, box};
}

}  // namespace detfuse
