#pragma once

// Deterministic synthetic datasets with controllable base-model behaviour.
//
// For every (sample, model) pair the generator decides whether the model is
// right (probability = its accuracy for the sample's true class), picks the
// predicted class, and turns it into a probability row by a softmax over
//   sharpness * (onehot(pred) + 0.5 * noise),   noise ~ U[0, 1)
// so the argmax is always the predicted class and sharpness sets the peak.
//
// Correlation: per pair, with probability `correlation` the right/wrong draw
// and the wrong class come from a source shared by all models for that sample,
// otherwise from the model's own source. Marginal accuracy is unchanged.
//
// All randomness is a pure function of (seed, sample index, model index,
// stream), so output does not depend on the parallel schedule.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ensdet/ensemble.hpp"
#include "ensdet/score_io.hpp"

namespace ensdet {

struct ModelSpec {
  std::string model_id;
  ScoreKind kind = ScoreKind::multiclass;
  std::optional<ClassIndex> target;  // per-manipulation models
  // One value for every class, or K+1 values indexed by the true class.
  std::vector<double> accuracy{0.75};
  double sharpness = 2.0;
  double correlation = 0.0;
};

struct OracleConfig {
  std::string dataset_name = "synthetic";
  std::uint64_t seed = 0;
  std::size_t k = 5;
  std::size_t samples_per_class = 2000;
  std::size_t faces_per_video = 4;
  std::vector<ModelSpec> models;

  void validate() const;
  double accuracy(std::size_t model, std::size_t true_class) const;
};

struct SyntheticData {
  DatasetManifest manifest;
  ScoreSet scores;
};

SyntheticData generate(const OracleConfig& config, unsigned jobs = 1);

// Class names used for a K-manipulation synthetic taxonomy.
Taxonomy synthetic_taxonomy(std::size_t k);

// "confident", "weak-diverse", "weak-correlated", "specialists".
std::span<const std::string_view> preset_names() noexcept;
OracleConfig preset(std::string_view name, std::uint64_t seed = 0);

// JSON form of OracleConfig, as accepted by `ensdet simulate --config`.
OracleConfig oracle_config_from_json(std::string_view text);
std::string oracle_config_to_json(const OracleConfig& config);

// Counter-based uniform draw in [0, 1).
double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t model, std::uint64_t stream) noexcept;

}  // namespace ensdet
