#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ensdet {

enum class Task { detection, attribution };
std::string_view to_string(Task task) noexcept;
Task parse_task(std::string_view text);

// Strict mode refuses a ground-truth class with no samples. Lenient mode drops
// it from the average and lists it in MetricsReport::excluded_classes.
enum class MetricMode { strict, lenient };
std::string_view to_string(MetricMode mode) noexcept;

// counts[truth][pred]. Exact integer counts; partial matrices built on
// disjoint sample subsets merge into the single-pass result.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  std::size_t classes() const noexcept { return classes_; }
  void add(std::size_t truth, std::size_t pred, std::uint64_t count = 1);
  ConfusionMatrix& merge(const ConfusionMatrix& other);

  std::uint64_t at(std::size_t truth, std::size_t pred) const noexcept {
    return counts_[truth * classes_ + pred];
  }
  std::uint64_t row_total(std::size_t truth) const noexcept;
  std::uint64_t total() const noexcept;
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

// Functional form of ConfusionMatrix::add.
ConfusionMatrix accumulate(ConfusionMatrix cm, std::size_t truth, std::size_t pred);

struct MetricsReport {
  Task task = Task::detection;
  double balanced_accuracy = 0.0;
  // nullopt for classes without ground-truth samples.
  std::vector<std::optional<double>> per_class_recall;
  std::uint64_t sample_count = 0;
  std::vector<std::size_t> excluded_classes;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// 0.5 recall(real) + 0.5 recall(fake); larger matrices are collapsed first.
MetricsReport detection_metrics(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict);

// 0.5 recall(real) + 0.5 mean(recall(1..K)) over a (K+1)x(K+1) matrix.
MetricsReport attribution_metrics(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict);

MetricsReport task_metrics(Task task, const ConfusionMatrix& cm, MetricMode mode);

inline double ba_detection(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict) {
  return detection_metrics(cm, mode).balanced_accuracy;
}
inline double ba_attribution(const ConfusionMatrix& cm, MetricMode mode = MetricMode::strict) {
  return attribution_metrics(cm, mode).balanced_accuracy;
}

// Folds classes 1..K of an attribution matrix into one fake class.
ConfusionMatrix collapse_to_detection(const ConfusionMatrix& cm);

}  // namespace ensdet
