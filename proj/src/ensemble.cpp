#include "ensdet/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "ensdet/error.hpp"

namespace ensdet {

std::string_view to_string(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::binary: return "binary";
    case ScoreKind::multiclass: return "multiclass";
    case ScoreKind::per_manipulation: return "per-manipulation";
  }
  return "?";
}

ScoreKind parse_score_kind(std::string_view text) {
  if (text == "binary") return ScoreKind::binary;
  if (text == "multiclass") return ScoreKind::multiclass;
  if (text == "per-manipulation") return ScoreKind::per_manipulation;
  throw_invalid("unknown score kind \"" + std::string(text) + "\"");
}

std::size_t row_width(ScoreKind kind, std::size_t manipulation_count) noexcept {
  return kind == ScoreKind::multiclass ? manipulation_count + 1 : 2;
}

ScoreTensor::ScoreTensor(std::string sample_id, ScoreKind kind, std::vector<std::string> model_ids,
                         std::size_t width, std::vector<double> values)
    : sample_id_(std::move(sample_id)),
      kind_(kind),
      model_ids_(std::move(model_ids)),
      width_(width),
      values_(std::move(values)) {
  if (model_ids_.empty()) throw_invalid("score tensor for " + sample_id_ + " is empty");
  if (width_ < 2) throw_invalid("score rows need at least two entries");
  if (kind_ != ScoreKind::multiclass && width_ != 2)
    throw_mismatch(std::string(to_string(kind_)) + " rows must have width 2, got " +
                   std::to_string(width_));
  if (values_.size() != model_ids_.size() * width_)
    throw_invalid("score tensor holds " + std::to_string(values_.size()) + " values for " +
                  std::to_string(model_ids_.size()) + " rows of width " + std::to_string(width_));
}

std::string_view to_string(Design design) noexcept {
  switch (design) {
    case Design::binary_soft: return "binary-soft";
    case Design::multiclass_soft: return "multiclass-soft";
    case Design::one_vs_real: return "one-vs-real";
    case Design::one_vs_rest: return "one-vs-rest";
  }
  return "?";
}

Design parse_design(std::string_view text) {
  if (text == "binary-soft") return Design::binary_soft;
  if (text == "multiclass-soft") return Design::multiclass_soft;
  if (text == "one-vs-real") return Design::one_vs_real;
  if (text == "one-vs-rest") return Design::one_vs_rest;
  throw_invalid("unknown ensemble design \"" + std::string(text) + "\"");
}

ScoreKind required_kind(Design design) noexcept {
  switch (design) {
    case Design::binary_soft: return ScoreKind::binary;
    case Design::multiclass_soft: return ScoreKind::multiclass;
    case Design::one_vs_real:
    case Design::one_vs_rest: return ScoreKind::per_manipulation;
  }
  return ScoreKind::binary;
}

bool uses_threshold(Design design) noexcept {
  return design == Design::one_vs_real || design == Design::one_vs_rest;
}

void EnsembleConfig::validate() const {
  if (k < 1 || k > kMaxManipulations)
    throw_invalid("manipulation count must be in [1, " + std::to_string(kMaxManipulations) + "]");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw_invalid("threshold must lie in [0, 1]");
}

std::vector<double> soft_average(const ScoreTensor& tensor) {
  const std::size_t n = tensor.rows();
  const std::size_t w = tensor.width();
  std::vector<double> column(n);
  std::vector<double> mean(w);
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = tensor.row(i)[j];
    std::sort(column.begin(), column.end());
    long double sum = 0.0L;
    for (double v : column) sum += v;
    mean[j] = static_cast<double>(sum / static_cast<long double>(n));
  }
  return mean;
}

std::size_t argmax(std::span<const double> values) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Decision combine_binary_soft(const ScoreTensor& tensor) {
  if (tensor.kind() != ScoreKind::binary || tensor.width() != 2)
    throw_mismatch("binary soft voting needs binary rows of width 2");
  Decision d;
  d.class_scores = soft_average(tensor);
  d.z_hat = argmax(d.class_scores) == 0 ? DetectionLabel::real : DetectionLabel::fake;
  d.y_hat = d.z_hat == DetectionLabel::real ? ClassIndex::real() : ClassIndex::unattributed_fake();
  d.fake_score = std::clamp(d.class_scores[1], 0.0, 1.0);
  return d;
}

Decision combine_multiclass_soft(const ScoreTensor& tensor, std::size_t k) {
  if (tensor.kind() != ScoreKind::multiclass || tensor.width() != k + 1)
    throw_mismatch("multiclass soft voting needs rows of width K+1 = " + std::to_string(k + 1) +
                   ", got " + std::to_string(tensor.width()));
  Decision d;
  d.class_scores = soft_average(tensor);
  d.y_hat = ClassIndex{static_cast<std::int32_t>(argmax(d.class_scores))};
  d.z_hat = to_detection(d.y_hat);
  long double fake_mass = 0.0L;
  for (std::size_t i = 1; i < d.class_scores.size(); ++i) fake_mass += d.class_scores[i];
  d.fake_score = std::clamp(static_cast<double>(fake_mass), 0.0, 1.0);
  return d;
}

MaxPool max_pool(const ScoreTensor& tensor) {
  if (tensor.kind() != ScoreKind::per_manipulation || tensor.width() != 2)
    throw_mismatch("max pooling needs per-manipulation rows of width 2");
  MaxPool pooled{tensor.row(0)[1], ClassIndex{1}};
  for (std::size_t i = 1; i < tensor.rows(); ++i) {
    const double s = tensor.row(i)[1];
    if (s > pooled.score) pooled = {s, ClassIndex{static_cast<std::int32_t>(i + 1)}};
  }
  return pooled;
}

namespace {

Decision combine_max_pooling(const ScoreTensor& tensor, const EnsembleConfig& config) {
  config.validate();
  if (tensor.rows() != config.k)
    throw_mismatch("max pooling needs one model per manipulation: K = " + std::to_string(config.k) +
                   ", got " + std::to_string(tensor.rows()) + " rows");
  const MaxPool pooled = max_pool(tensor);
  Decision d;
  d.y_hat = apply_threshold(pooled, config.threshold);
  d.z_hat = to_detection(d.y_hat);
  d.fake_score = pooled.score;
  d.class_scores.reserve(tensor.rows());
  for (std::size_t i = 0; i < tensor.rows(); ++i) d.class_scores.push_back(tensor.row(i)[1]);
  return d;
}

}  // namespace

Decision combine_one_vs_real(const ScoreTensor& tensor, const EnsembleConfig& config) {
  return combine_max_pooling(tensor, config);
}

// Same rule as one-vs-real; the two ensembles differ only in how the
// specialists were trained.
Decision combine_one_vs_rest(const ScoreTensor& tensor, const EnsembleConfig& config) {
  return combine_max_pooling(tensor, config);
}

Decision combine(const ScoreTensor& tensor, const EnsembleConfig& config) {
  switch (config.design) {
    case Design::binary_soft: return combine_binary_soft(tensor);
    case Design::multiclass_soft: return combine_multiclass_soft(tensor, config.k);
    case Design::one_vs_real: return combine_one_vs_real(tensor, config);
    case Design::one_vs_rest: return combine_one_vs_rest(tensor, config);
  }
  throw_invalid("unknown design");
}

}  // namespace ensdet
