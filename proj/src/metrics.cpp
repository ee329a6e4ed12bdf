#include "ensdet/metrics.hpp"

#include <numeric>
#include <string>

#include "ensdet/error.hpp"

namespace ensdet {

std::string_view to_string(Task task) noexcept {
  return task == Task::detection ? "detection" : "attribution";
}

Task parse_task(std::string_view text) {
  if (text == "detection") return Task::detection;
  if (text == "attribution") return Task::attribution;
  throw_invalid("unknown task \"" + std::string(text) + "\"");
}

std::string_view to_string(MetricMode mode) noexcept {
  return mode == MetricMode::strict ? "strict" : "lenient";
}

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
  if (classes < 2) throw_invalid("a confusion matrix needs at least two classes");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, std::uint64_t count) {
  if (truth >= classes_ || pred >= classes_)
    throw_invalid("label pair (" + std::to_string(truth) + ", " + std::to_string(pred) +
                  ") outside a " + std::to_string(classes_) + "-class confusion matrix");
  counts_[truth * classes_ + pred] += count;
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw_mismatch("cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const noexcept {
  auto first = counts_.begin() + static_cast<std::ptrdiff_t>(truth * classes_);
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(classes_), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix accumulate(ConfusionMatrix cm, std::size_t truth, std::size_t pred) {
  cm.add(truth, pred);
  return cm;
}

namespace {

MetricsReport base_report(Task task, const ConfusionMatrix& cm, MetricMode mode) {
  MetricsReport r;
  r.task = task;
  r.sample_count = cm.total();
  r.per_class_recall.resize(cm.classes());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const std::uint64_t n = cm.row_total(c);
    if (n == 0) {
      if (mode == MetricMode::strict)
        throw Error(ErrorKind::data_mismatch,
                    std::string(to_string(task)) + " metric: class " + std::to_string(c) +
                        " has no ground-truth samples (use lenient mode to exclude it)");
      r.excluded_classes.push_back(c);
      continue;
    }
    r.per_class_recall[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(n);
  }
  if (r.excluded_classes.size() == cm.classes())
    throw Error(ErrorKind::data_mismatch, std::string(to_string(task)) + " metric: no samples");
  return r;
}

}  // namespace

MetricsReport detection_metrics(const ConfusionMatrix& cm, MetricMode mode) {
  if (cm.classes() != 2) return detection_metrics(collapse_to_detection(cm), mode);
  MetricsReport r = base_report(Task::detection, cm, mode);
  const auto& rec = r.per_class_recall;
  if (rec[0] && rec[1]) {
    r.balanced_accuracy = 0.5 * *rec[0] + 0.5 * *rec[1];
  } else {
    r.balanced_accuracy = rec[0] ? *rec[0] : *rec[1];
  }
  return r;
}

MetricsReport attribution_metrics(const ConfusionMatrix& cm, MetricMode mode) {
  MetricsReport r = base_report(Task::attribution, cm, mode);
  const auto& rec = r.per_class_recall;
  double fake_sum = 0.0;
  std::size_t fake_classes = 0;
  for (std::size_t c = 1; c < rec.size(); ++c) {
    if (!rec[c]) continue;
    fake_sum += *rec[c];
    ++fake_classes;
  }
  if (rec[0] && fake_classes > 0) {
    r.balanced_accuracy = 0.5 * *rec[0] + 0.5 * (fake_sum / static_cast<double>(fake_classes));
  } else if (rec[0]) {
    r.balanced_accuracy = *rec[0];
  } else {
    r.balanced_accuracy = fake_sum / static_cast<double>(fake_classes);
  }
  return r;
}

MetricsReport task_metrics(Task task, const ConfusionMatrix& cm, MetricMode mode) {
  return task == Task::detection ? detection_metrics(cm, mode) : attribution_metrics(cm, mode);
}

ConfusionMatrix collapse_to_detection(const ConfusionMatrix& cm) {
  ConfusionMatrix out(2);
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      out.add(t == 0 ? 0 : 1, p == 0 ? 0 : 1, cm.at(t, p));
    }
  }
  return out;
}

}  // namespace ensdet
