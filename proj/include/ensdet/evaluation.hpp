#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ensdet/aggregation.hpp"
#include "ensdet/ensemble.hpp"
#include "ensdet/metrics.hpp"
#include "ensdet/score_io.hpp"

namespace ensdet {

enum class Level { face, video };
std::string_view to_string(Level level) noexcept;
Level parse_level(std::string_view text);

struct EvaluationOptions {
  Design design = Design::multiclass_soft;
  double threshold = 0.5;
  Task task = Task::detection;
  Level level = Level::face;
  MetricMode mode = MetricMode::strict;
  AggregationPolicy aggregation;
  // Restricts the roster to these model ids; empty selects every model whose
  // kind matches the design.
  std::vector<std::string> models;
  unsigned jobs = 1;
};

struct EvaluationResult {
  std::string dataset;
  Design design = Design::multiclass_soft;
  double threshold = 0.5;
  Task task = Task::detection;
  Level level = Level::face;
  MetricMode mode = MetricMode::strict;
  std::vector<std::string> models;
  std::vector<std::string> class_names;  // confusion-matrix axis labels
  ConfusionMatrix confusion{2};
  MetricsReport metrics;
};

// Model indices forming the ensemble for a design. Per-manipulation rosters come
// back ordered by target class. Throws Error(data_mismatch) when the roster
// cannot serve the design.
std::vector<std::size_t> select_roster(const ScoreSet& scores, Design design,
                                       std::span<const std::string> model_filter = {});

// Throws when the manifest cannot support the task for this design.
void check_task_support(const DatasetManifest& manifest, Design design, Task task, Level level);

// One decision per manifest record, in manifest order.
std::vector<Decision> decide_all(const DatasetManifest& manifest, const ScoreSet& scores,
                                 std::span<const std::size_t> roster, const EnsembleConfig& config,
                                 unsigned jobs = 1);

// Verdicts per video from face decisions (in manifest order), ordered by video id.
std::vector<VideoVerdict> aggregate_videos(const DatasetManifest& manifest, std::span<const Decision> decisions,
                                           const AggregationPolicy& policy);

// A video is fake iff any of its faces is labeled fake.
std::map<std::string, DetectionLabel> video_labels(const DatasetManifest& manifest);

EvaluationResult evaluate(const DatasetManifest& manifest, const ScoreSet& scores,
                          const EvaluationOptions& options);

}  // namespace ensdet
