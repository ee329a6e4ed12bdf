#pragma once

// Line-delimited, tab-separated wire formats for dataset manifests and score
// files. Both start with a format-version line and a '#'-prefixed header block;
// data lines follow in a fixed column order.
//
// Manifest:
//   #format      ensdet-manifest  1
//   #dataset     <name>
//   #taxonomy    <name>  real  <class 1> ... <class K>
//   #label_mode  full | detection-only
//   #columns     sample_id  video_id  frame_index  identity_id  y  z
//   <sample_id> <video_id> <frame_index> <identity_id> <class name | -> <0 | 1>
//
// Scores:
//   #format      ensdet-scores  1
//   #taxonomy    <name>  real  <class 1> ... <class K>
//   #model       <model_id>  binary | multiclass | per-manipulation  [<target class>]
//   #columns     sample_id  model_id  scores
//   <sample_id> <model_id> <p_0> ... <p_w-1>
//
// Scores are written with 9 significant digits.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ensdet/ensemble.hpp"
#include "ensdet/labels.hpp"

namespace ensdet {

inline constexpr int kManifestFormatVersion = 1;
inline constexpr int kScoresFormatVersion = 1;

// Row sums further than this from 1 are rejected.
inline constexpr double kRowSumTolerance = 1e-6;

enum class LabelMode { full, detection_only };
std::string_view to_string(LabelMode mode) noexcept;
LabelMode parse_label_mode(std::string_view text);

struct DatasetManifest {
  std::string dataset_name;
  Taxonomy taxonomy;
  LabelMode label_mode = LabelMode::full;
  std::vector<FaceRecord> records;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Record-level and manifest-level violations (duplicate ids, labels that do
// not match the label mode, inconsistent labels). Empty means valid.
std::vector<std::string> validate_manifest(const DatasetManifest& manifest);

DatasetManifest read_manifest(std::istream& in, const std::string& source = "<manifest>");
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const DatasetManifest& manifest);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

struct ModelInfo {
  std::string model_id;
  ScoreKind kind = ScoreKind::multiclass;
  std::optional<ClassIndex> target;  // per-manipulation models only

  friend bool operator==(const ModelInfo&, const ModelInfo&) = default;
};

enum class RowStatus { exact, renormalized };

// Checks the probability-row invariants and rescales rows whose sum is off by
// more than formatting noise but within kRowSumTolerance. Returns the reason on
// rejection.
std::optional<std::string> normalize_probability_row(std::span<double> row, RowStatus* status = nullptr);

// Immutable-after-load score store: one probability row per (sample, model),
// kept in insertion order for serialization and indexed by sample id.
class ScoreSet {
 public:
  ScoreSet() = default;
  ScoreSet(Taxonomy taxonomy, std::vector<ModelInfo> roster);

  const Taxonomy& taxonomy() const noexcept { return taxonomy_; }
  const std::vector<ModelInfo>& roster() const noexcept { return roster_; }
  std::optional<std::size_t> find_model(std::string_view model_id) const;
  std::size_t width(std::size_t model) const noexcept {
    return row_width(roster_[model].kind, taxonomy_.manipulation_count());
  }

  // Validates and stores one row. Throws Error(validation) on any violation.
  void add(std::string sample_id, std::size_t model, std::vector<double> row);

  std::optional<std::span<const double>> find(std::string_view sample_id, std::size_t model) const;

  std::size_t row_count() const noexcept { return entries_.size(); }
  std::size_t sample_count() const noexcept { return index_.size(); }

  struct Entry {
    std::string sample_id;
    std::size_t model;
    std::size_t offset;
  };
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::span<const double> values(const Entry& e) const noexcept {
    return {values_.data() + e.offset, width(e.model)};
  }

 private:
  Taxonomy taxonomy_;
  std::vector<ModelInfo> roster_;
  std::vector<Entry> entries_;
  std::vector<double> values_;
  // sample id -> entry index per roster model (npos when absent)
  std::unordered_map<std::string, std::vector<std::size_t>> index_;
};

// When a manifest is given, the taxonomy must match and every sample id must
// belong to it.
ScoreSet read_scores(std::istream& in, const DatasetManifest* manifest = nullptr,
                     const std::string& source = "<scores>");
ScoreSet read_scores(const std::filesystem::path& path, const DatasetManifest* manifest = nullptr);
void write_scores(std::ostream& out, const ScoreSet& scores);
void write_scores(const std::filesystem::path& path, const ScoreSet& scores);

// Tensor rows follow roster order. All roster models must share one kind, and a
// per-manipulation roster must list targets 1..K in order so row i scores
// manipulation i+1. Throws Error(data_mismatch) on a missing pair.
ScoreTensor assemble_tensor(std::string_view sample_id, std::span<const std::size_t> roster,
                            const ScoreSet& scores);

// Missing (sample, model) pairs for the given roster, one message each.
std::vector<std::string> coverage_violations(const DatasetManifest& manifest, const ScoreSet& scores,
                                             std::span<const std::size_t> roster);

// Canonical 9-significant-digit rendering of a score.
std::string format_score(double value);

}  // namespace ensdet
