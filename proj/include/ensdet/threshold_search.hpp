#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ensdet/evaluation.hpp"

namespace ensdet {

// 0.05, 0.10, ..., 0.95 (19 points).
std::vector<double> default_grid();

// Inclusive grid lo, lo+step, ..., hi. Points are snapped to nine decimals so
// accumulated step error never leaks into reports. lo == hi yields one point.
std::vector<double> make_grid(double lo, double hi, double step);

// Parses "lo:hi:step".
std::vector<double> parse_grid(std::string_view text);

struct SweepOptions {
  Design design = Design::one_vs_real;
  Task task = Task::attribution;  // objective for picking the best threshold
  MetricMode mode = MetricMode::strict;
  std::vector<std::string> models;
  unsigned jobs = 1;
};

struct SweepPoint {
  double threshold = 0.0;
  EvaluationResult detection;
  std::optional<EvaluationResult> attribution;  // present when the manifest has attribution labels
};

struct SweepResult {
  Design design = Design::one_vs_real;
  Task task = Task::attribution;
  std::vector<SweepPoint> points;
  double best_threshold = 0.0;
  double best_balanced_accuracy = 0.0;

  std::vector<double> grid() const;
  const EvaluationResult& at(std::size_t i, Task task) const;
};

// Scores are pooled once per sample; every grid point re-thresholds the pooled
// scores. Best point: highest balanced accuracy for options.task, ties to the
// smallest threshold.
SweepResult sweep(const DatasetManifest& manifest, const ScoreSet& scores, std::span<const double> grid,
                  const SweepOptions& options);

}  // namespace ensdet
