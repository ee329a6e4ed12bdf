#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ensdet/labels.hpp"

namespace ensdet {

// What a base model's probability row means.
//   binary            width 2: (real, fake)
//   multiclass        width K+1: one entry per taxonomy class
//   per_manipulation  width 2: (negative, manipulation i); one model per class 1..K
enum class ScoreKind { binary, multiclass, per_manipulation };

std::string_view to_string(ScoreKind kind) noexcept;
ScoreKind parse_score_kind(std::string_view text);
std::size_t row_width(ScoreKind kind, std::size_t manipulation_count) noexcept;

// N model outputs for one face, stored row-major.
class ScoreTensor {
 public:
  ScoreTensor(std::string sample_id, ScoreKind kind, std::vector<std::string> model_ids,
              std::size_t width, std::vector<double> values);

  const std::string& sample_id() const noexcept { return sample_id_; }
  ScoreKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& model_ids() const noexcept { return model_ids_; }
  std::size_t rows() const noexcept { return model_ids_.size(); }
  std::size_t width() const noexcept { return width_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * width_, width_};
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::string sample_id_;
  ScoreKind kind_;
  std::vector<std::string> model_ids_;
  std::size_t width_;
  std::vector<double> values_;
};

enum class Design { binary_soft, multiclass_soft, one_vs_real, one_vs_rest };

std::string_view to_string(Design design) noexcept;
Design parse_design(std::string_view text);
ScoreKind required_kind(Design design) noexcept;
bool uses_threshold(Design design) noexcept;

struct EnsembleConfig {
  Design design = Design::multiclass_soft;
  std::size_t k = 1;       // manipulation count
  double threshold = 0.5;  // max-pooling designs only

  void validate() const;
};

struct Decision {
  ClassIndex y_hat;
  DetectionLabel z_hat = DetectionLabel::real;
  double fake_score = 0.0;
  // Averaged probabilities for the soft designs, per-manipulation scores s_1..s_K
  // for the max-pooling designs.
  std::vector<double> class_scores;

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Column means of the tensor. Each column is summed in sorted order at extended
// precision, so the result does not depend on row order and N copies of one row
// average back to that row exactly.
std::vector<double> soft_average(const ScoreTensor& tensor);

// Lowest index among the maxima.
std::size_t argmax(std::span<const double> values) noexcept;

Decision combine_binary_soft(const ScoreTensor& tensor);
Decision combine_multiclass_soft(const ScoreTensor& tensor, std::size_t k);

// Largest manipulation score and its 1-based class, ties to the lowest class.
struct MaxPool {
  double score = 0.0;
  ClassIndex argmax;
};

MaxPool max_pool(const ScoreTensor& tensor);

// Fake requires the pooled score to strictly exceed t; equality is real.
constexpr ClassIndex apply_threshold(const MaxPool& pooled, double threshold) noexcept {
  return pooled.score > threshold ? pooled.argmax : ClassIndex::real();
}

Decision combine_one_vs_real(const ScoreTensor& tensor, const EnsembleConfig& config);
Decision combine_one_vs_rest(const ScoreTensor& tensor, const EnsembleConfig& config);

// Dispatch on config.design.
Decision combine(const ScoreTensor& tensor, const EnsembleConfig& config);

}  // namespace ensdet
