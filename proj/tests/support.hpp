#pragma once

// Random instance generators and brute-force reference implementations shared
// by the unit suites and the acceptance runner. The references deliberately
// avoid the library's helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ensdet/ensemble.hpp"
#include "ensdet/error.hpp"
#include "ensdet/metrics.hpp"
#include "ensdet/score_io.hpp"

namespace ensdet::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// A probability row of the given width. With `coarse` the entries are
// multiples of 1/8 so sums are exact and ties are frequent.
inline std::vector<double> random_row(Rng& rng, std::size_t width, bool coarse) {
  std::vector<double> row(width);
  if (coarse) {
    std::size_t left = 8;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      const std::size_t take = pick(rng, 0, left);
      row[j] = static_cast<double>(take) / 8.0;
      left -= take;
    }
    row[width - 1] = static_cast<double>(left) / 8.0;
    std::shuffle(row.begin(), row.end(), rng);
    return row;
  }
  double sum = 0.0;
  for (auto& v : row) {
    v = -std::log(uniform(rng, 1e-12, 1.0));
    sum += v;
  }
  for (auto& v : row) v /= sum;
  return row;
}

inline ScoreTensor random_tensor(Rng& rng, ScoreKind kind, std::size_t rows, std::size_t k, bool coarse) {
  const std::size_t width = row_width(kind, k);
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows; ++i) {
    ids.push_back("m" + std::to_string(i));
    const auto row = random_row(rng, width, coarse);
    values.insert(values.end(), row.begin(), row.end());
  }
  return ScoreTensor("s", kind, std::move(ids), width, std::move(values));
}

struct ReferenceDecision {
  int y_hat = 0;  // -1 for an unattributed fake
  int z_hat = 0;
  std::vector<double> class_scores;
};

inline std::vector<double> reference_mean(const ScoreTensor& t) {
  std::vector<double> mean(t.width());
  for (std::size_t j = 0; j < t.width(); ++j) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < t.rows(); ++i) s += t.values()[i * t.width() + j];
    mean[j] = static_cast<double>(s / t.rows());
  }
  return mean;
}

inline int reference_argmax(const std::vector<double>& v) {
  int best = 0;
  for (int j = 0; j < static_cast<int>(v.size()); ++j) {
    bool beaten = false;
    for (int i = 0; i < j; ++i) beaten = beaten || v[i] >= v[j];
    for (int i = j + 1; i < static_cast<int>(v.size()); ++i) beaten = beaten || v[i] > v[j];
    if (!beaten) {
      best = j;
      break;
    }
  }
  return best;
}

inline ReferenceDecision reference_decision(const ScoreTensor& t, Design design, double threshold) {
  ReferenceDecision d;
  switch (design) {
    case Design::binary_soft: {
      d.class_scores = reference_mean(t);
      d.z_hat = d.class_scores[1] > d.class_scores[0] ? 1 : 0;
      d.y_hat = d.z_hat == 1 ? -1 : 0;
      break;
    }
    case Design::multiclass_soft: {
      d.class_scores = reference_mean(t);
      d.y_hat = reference_argmax(d.class_scores);
      d.z_hat = d.y_hat > 0 ? 1 : 0;
      break;
    }
    case Design::one_vs_real:
    case Design::one_vs_rest: {
      for (std::size_t i = 0; i < t.rows(); ++i) d.class_scores.push_back(t.values()[i * 2 + 1]);
      const int i_star = reference_argmax(d.class_scores);
      d.y_hat = d.class_scores[i_star] > threshold ? i_star + 1 : 0;
      d.z_hat = d.y_hat > 0 ? 1 : 0;
      break;
    }
  }
  return d;
}

// Per-class recall straight from the counts; nullopt for an empty class.
inline std::vector<std::optional<double>> reference_recalls(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> r(cm.classes());
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    std::uint64_t row = 0;
    for (std::size_t p = 0; p < cm.classes(); ++p) row += cm.at(t, p);
    if (row > 0) r[t] = static_cast<double>(cm.at(t, t)) / static_cast<double>(row);
  }
  return r;
}

inline double reference_ba_detection(const ConfusionMatrix& cm) {
  std::uint64_t rr = 0, rn = 0, ff = 0, fn = 0;
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      const auto c = cm.at(t, p);
      if (t == 0) {
        rn += c;
        if (p == 0) rr += c;
      } else {
        fn += c;
        if (p != 0) ff += c;
      }
    }
  }
  return 0.5 * static_cast<double>(rr) / static_cast<double>(rn) +
         0.5 * static_cast<double>(ff) / static_cast<double>(fn);
}

inline double reference_ba_attribution(const ConfusionMatrix& cm) {
  const auto r = reference_recalls(cm);
  double fake = 0.0;
  for (std::size_t c = 1; c < r.size(); ++c) fake += *r[c];
  return 0.5 * *r[0] + 0.5 * fake / static_cast<double>(r.size() - 1);
}

inline ConfusionMatrix random_confusion(Rng& rng, std::size_t classes, bool allow_empty) {
  ConfusionMatrix cm(classes);
  for (std::size_t t = 0; t < classes; ++t) {
    if (allow_empty && pick(rng, 0, 4) == 0) continue;
    for (std::size_t p = 0; p < classes; ++p) cm.add(t, p, pick(rng, 0, 50));
    if (cm.row_total(t) == 0) cm.add(t, pick(rng, 0, classes - 1));
  }
  return cm;
}

struct RandomDataset {
  DatasetManifest manifest;
  ScoreSet scores;
};

inline std::string random_name(Rng& rng, const std::string& prefix) {
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.";
  std::string s = prefix;
  const std::size_t n = pick(rng, 1, 8);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng, 0, sizeof alphabet - 2)];
  return s;
}

// Random but valid manifest plus a complete score set over a random roster.
inline RandomDataset random_dataset(Rng& rng) {
  const std::size_t k = pick(rng, 1, 6);
  std::vector<std::string> names{"real"};
  for (std::size_t c = 1; c <= k; ++c) names.push_back("M" + std::to_string(c) + random_name(rng, "_"));
  RandomDataset d;
  d.manifest.dataset_name = random_name(rng, "ds");
  d.manifest.taxonomy = Taxonomy(random_name(rng, "tax"), names);
  d.manifest.label_mode = pick(rng, 0, 3) == 0 ? LabelMode::detection_only : LabelMode::full;
  const std::size_t n = pick(rng, 1, 30);
  for (std::size_t i = 0; i < n; ++i) {
    FaceRecord r;
    r.sample_id = "s" + std::to_string(i) + random_name(rng, ".");
    r.video_id = "v" + std::to_string(pick(rng, 0, 5));
    r.identity_id = "p" + std::to_string(pick(rng, 0, 2));
    r.frame_index = pick(rng, 0, 1) ? pick(rng, 0, 100) : rng();
    const ClassIndex y{static_cast<std::int32_t>(pick(rng, 0, k))};
    if (d.manifest.label_mode == LabelMode::full) r.label_y = y;
    r.label_z = to_detection(y);
    d.manifest.records.push_back(std::move(r));
  }
  std::vector<ModelInfo> roster;
  const std::size_t models = pick(rng, 1, 5);
  for (std::size_t m = 0; m < models; ++m) {
    ModelInfo info;
    info.model_id = "model-" + std::to_string(m);
    info.kind = static_cast<ScoreKind>(pick(rng, 0, 2));
    if (info.kind == ScoreKind::per_manipulation) info.target = ClassIndex{static_cast<std::int32_t>(pick(rng, 1, k))};
    roster.push_back(std::move(info));
  }
  d.scores = ScoreSet(d.manifest.taxonomy, roster);
  for (const auto& r : d.manifest.records) {
    for (std::size_t m = 0; m < models; ++m) {
      d.scores.add(r.sample_id, m, random_row(rng, d.scores.width(m), pick(rng, 0, 3) == 0));
    }
  }
  return d;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ensdet-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace ensdet::testing
