#include "ensdet/threshold_search.hpp"

#include <charconv>
#include <cmath>

#include "ensdet/error.hpp"
#include "ensdet/parallel.hpp"

namespace ensdet {

namespace {

double snap(double v) { return std::round(v * 1e9) / 1e9; }

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw_invalid("malformed grid value \"" + std::string(text) + "\"");
  return v;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw_invalid("threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw_invalid("thresholds must lie in [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw_invalid("threshold grid must be strictly increasing");
  }
}

}  // namespace

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(static_cast<double>(5 * i) / 100.0);
  return grid;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw_invalid("grid bounds must satisfy 0 <= lo <= hi <= 1");
  if (lo == hi) return {lo};
  if (!(step > 0.0)) throw_invalid("grid step must be positive");
  const auto intervals = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) grid.push_back(snap(lo + static_cast<double>(i) * step));
  check_grid(grid);
  return grid;
}

std::vector<double> parse_grid(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos)
    throw_invalid("grid must be written lo:hi:step, got \"" + std::string(text) + "\"");
  return make_grid(parse_number(text.substr(0, first)), parse_number(text.substr(first + 1, second - first - 1)),
                   parse_number(text.substr(second + 1)));
}

std::vector<double> SweepResult::grid() const {
  std::vector<double> g;
  g.reserve(points.size());
  for (const auto& p : points) g.push_back(p.threshold);
  return g;
}

const EvaluationResult& SweepResult::at(std::size_t i, Task t) const {
  const SweepPoint& p = points.at(i);
  if (t == Task::detection) return p.detection;
  if (!p.attribution) throw_invalid("sweep has no attribution results");
  return *p.attribution;
}

SweepResult sweep(const DatasetManifest& manifest, const ScoreSet& scores, std::span<const double> grid,
                  const SweepOptions& options) {
  if (!uses_threshold(options.design))
    throw_invalid("threshold sweeps apply to the one-vs-real and one-vs-rest designs only");
  if (!(manifest.taxonomy == scores.taxonomy()))
    throw_mismatch("manifest and score file use different taxonomies");
  check_task_support(manifest, options.design, options.task, Level::face);
  check_grid(grid);

  const auto roster = select_roster(scores, options.design, options.models);
  const std::size_t n = manifest.records.size();
  std::vector<MaxPool> pooled(n);
  parallel_chunks(n, options.jobs, [&](ChunkRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i)
      pooled[i] = max_pool(assemble_tensor(manifest.records[i].sample_id, roster, scores));
  });

  const bool with_attribution = manifest.label_mode == LabelMode::full;

  auto make_result = [&](double t, Task task) {
    EvaluationResult r;
    r.dataset = manifest.dataset_name;
    r.design = options.design;
    r.threshold = t;
    r.task = task;
    r.level = Level::face;
    r.mode = options.mode;
    for (std::size_t m : roster) r.models.push_back(scores.roster()[m].model_id);
    if (task == Task::detection) {
      r.class_names = {"real", "fake"};
    } else {
      r.class_names = manifest.taxonomy.class_names();
    }
    r.confusion = ConfusionMatrix(r.class_names.size());
    return r;
  };

  SweepResult result;
  result.design = options.design;
  result.task = options.task;
  result.points.resize(grid.size());
  parallel_chunks(grid.size(), options.jobs, [&](ChunkRange range) {
    for (std::size_t g = range.begin; g < range.end; ++g) {
      const double t = grid[g];
      SweepPoint& point = result.points[g];
      point.threshold = t;
      point.detection = make_result(t, Task::detection);
      if (with_attribution) point.attribution = make_result(t, Task::attribution);
      for (std::size_t i = 0; i < n; ++i) {
        const FaceRecord& rec = manifest.records[i];
        const ClassIndex y_hat = apply_threshold(pooled[i], t);
        point.detection.confusion.add(static_cast<std::size_t>(as_int(*rec.label_z)),
                                      static_cast<std::size_t>(as_int(to_detection(y_hat))));
        if (point.attribution)
          point.attribution->confusion.add(static_cast<std::size_t>(rec.label_y->value),
                                           static_cast<std::size_t>(y_hat.value));
      }
      point.detection.metrics = detection_metrics(point.detection.confusion, options.mode);
      if (point.attribution) {
        try {
          point.attribution->metrics = attribution_metrics(point.attribution->confusion, options.mode);
        } catch (const Error&) {
          // Only fatal when attribution is the objective.
          if (options.task == Task::attribution) throw;
          point.attribution.reset();
        }
      }
    }
  });

  result.best_threshold = result.points.front().threshold;
  result.best_balanced_accuracy = result.at(0, options.task).metrics.balanced_accuracy;
  for (std::size_t g = 1; g < result.points.size(); ++g) {
    const double ba = result.at(g, options.task).metrics.balanced_accuracy;
    if (ba > result.best_balanced_accuracy) {
      result.best_balanced_accuracy = ba;
      result.best_threshold = result.points[g].threshold;
    }
  }
  return result;
}

}  // namespace ensdet
