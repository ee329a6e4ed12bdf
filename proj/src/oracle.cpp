#include "ensdet/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "ensdet/error.hpp"
#include "ensdet/parallel.hpp"

namespace ensdet {

namespace {

constexpr std::uint64_t kSharedModel = std::numeric_limits<std::uint64_t>::max();

// Streams per (sample, model) pair.
enum Stream : std::uint64_t {
  kChooseSource = 0,
  kCorrect = 1,
  kWrongClass = 2,
  kNoiseBase = 3,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string zero_padded(char prefix, std::size_t value, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, digits, value);
  return buf;
}

void softmax_row(std::span<double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t model, std::uint64_t stream) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ sample);
  h = splitmix64(h ^ model);
  h = splitmix64(h ^ stream);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void OracleConfig::validate() const {
  if (k < 1 || k > kMaxManipulations)
    throw_invalid("oracle: K must be in [1, " + std::to_string(kMaxManipulations) + "]");
  if (samples_per_class < 1) throw_invalid("oracle: samples_per_class must be at least 1");
  if (faces_per_video < 1) throw_invalid("oracle: faces_per_video must be at least 1");
  if (models.empty()) throw_invalid("oracle: no models configured");
  for (const auto& m : models) {
    const std::string who = "oracle model \"" + m.model_id + "\": ";
    if (m.accuracy.size() != 1 && m.accuracy.size() != k + 1)
      throw_invalid(who + "accuracy needs 1 or K+1 entries");
    for (double a : m.accuracy) {
      if (!(a > 0.0 && a < 1.0)) throw_invalid(who + "accuracy targets must lie in (0, 1)");
    }
    if (!(m.sharpness > 0.0 && std::isfinite(m.sharpness))) throw_invalid(who + "sharpness must be positive");
    if (!(m.correlation >= 0.0 && m.correlation <= 1.0)) throw_invalid(who + "correlation must lie in [0, 1]");
    if (m.kind == ScoreKind::per_manipulation) {
      if (!m.target || m.target->value < 1 || static_cast<std::size_t>(m.target->value) > k)
        throw_invalid(who + "per-manipulation models need a target class in 1..K");
    } else if (m.target) {
      throw_invalid(who + "only per-manipulation models take a target class");
    }
  }
}

double OracleConfig::accuracy(std::size_t model, std::size_t true_class) const {
  const auto& a = models.at(model).accuracy;
  return a.size() == 1 ? a.front() : a.at(true_class);
}

Taxonomy synthetic_taxonomy(std::size_t k) {
  std::vector<std::string> names{"real"};
  if (k == 5) {
    names.insert(names.end(), {"Deepfakes", "Face2Face", "FaceSwap", "NeuralTextures", "FaceShifter"});
  } else {
    for (std::size_t i = 1; i <= k; ++i) names.push_back("manipulation-" + std::to_string(i));
  }
  return Taxonomy("synthetic-k" + std::to_string(k), std::move(names));
}

SyntheticData generate(const OracleConfig& config, unsigned jobs) {
  config.validate();
  const std::size_t k = config.k;
  const std::size_t classes = k + 1;
  const std::size_t total = classes * config.samples_per_class;
  const std::size_t videos_per_class = (config.samples_per_class + config.faces_per_video - 1) / config.faces_per_video;

  Taxonomy taxonomy = synthetic_taxonomy(k);
  std::vector<ModelInfo> roster;
  std::vector<std::size_t> offsets;  // value offset of each model within a sample block
  std::size_t block = 0;
  for (const auto& m : config.models) {
    roster.push_back({m.model_id, m.kind, m.target});
    offsets.push_back(block);
    block += row_width(m.kind, k);
  }

  SyntheticData out{{config.dataset_name, taxonomy, LabelMode::full, {}}, ScoreSet(taxonomy, roster)};
  out.manifest.records.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    const std::size_t c = n / config.samples_per_class;
    const std::size_t j = n % config.samples_per_class;
    const std::size_t video = c * videos_per_class + j / config.faces_per_video;
    FaceRecord r;
    r.sample_id = zero_padded('s', n, 7);
    r.video_id = zero_padded('v', video, 6);
    r.identity_id = r.video_id + "-p0";
    r.frame_index = j % config.faces_per_video;
    r.label_y = ClassIndex{static_cast<std::int32_t>(c)};
    r.label_z = to_detection(*r.label_y);
    out.manifest.records.push_back(std::move(r));
  }

  std::vector<double> values(total * block);
  parallel_chunks(total, jobs, [&](ChunkRange range) {
    std::vector<double> logits;
    for (std::size_t n = range.begin; n < range.end; ++n) {
      const std::size_t c = n / config.samples_per_class;
      const double shared_u = counter_uniform(config.seed, n, kSharedModel, kCorrect);
      const double shared_w = counter_uniform(config.seed, n, kSharedModel, kWrongClass);
      for (std::size_t m = 0; m < config.models.size(); ++m) {
        const ModelSpec& spec = config.models[m];
        const bool shared = counter_uniform(config.seed, n, m, kChooseSource) < spec.correlation;
        const double u = shared ? shared_u : counter_uniform(config.seed, n, m, kCorrect);
        const double w = shared ? shared_w : counter_uniform(config.seed, n, m, kWrongClass);
        const bool correct = u < config.accuracy(m, c);

        const std::size_t width = row_width(spec.kind, k);
        std::size_t truth = 0;
        std::size_t wrong = 0;
        switch (spec.kind) {
          case ScoreKind::multiclass: {
            truth = c;
            wrong = std::min(static_cast<std::size_t>(w * static_cast<double>(k)), k - 1);
            if (wrong >= truth) ++wrong;
            break;
          }
          case ScoreKind::binary:
            truth = c == 0 ? 0 : 1;
            wrong = 1 - truth;
            break;
          case ScoreKind::per_manipulation:
            truth = c == static_cast<std::size_t>(spec.target->value) ? 1 : 0;
            wrong = 1 - truth;
            break;
        }
        const std::size_t pred = correct ? truth : wrong;

        logits.assign(width, 0.0);
        for (std::size_t e = 0; e < width; ++e) {
          const double noise = counter_uniform(config.seed, n, m, kNoiseBase + e);
          logits[e] = spec.sharpness * ((e == pred ? 1.0 : 0.0) + 0.5 * noise);
        }
        softmax_row(logits);
        std::copy(logits.begin(), logits.end(), values.begin() + static_cast<std::ptrdiff_t>(n * block + offsets[m]));
      }
    }
  });

  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t m = 0; m < roster.size(); ++m) {
      const auto first = values.begin() + static_cast<std::ptrdiff_t>(n * block + offsets[m]);
      out.scores.add(out.manifest.records[n].sample_id, m,
                     std::vector<double>(first, first + static_cast<std::ptrdiff_t>(row_width(roster[m].kind, k))));
    }
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, 4> kPresetNames = {"confident", "weak-diverse", "weak-correlated",
                                                          "specialists"};

struct GroupSpec {
  std::vector<double> accuracy;
  double sharpness;
};

// Six multiclass models, three binary models and one per-manipulation
// specialist per class.
OracleConfig standard_roster(std::string name, std::uint64_t seed, const GroupSpec& multiclass,
                             const GroupSpec& binary, const std::vector<std::vector<double>>& specialist_accuracy,
                             double specialist_sharpness, double correlation) {
  OracleConfig cfg;
  cfg.dataset_name = "synthetic-" + name;
  cfg.seed = seed;
  const Taxonomy taxonomy = synthetic_taxonomy(cfg.k);
  for (int i = 1; i <= 6; ++i)
    cfg.models.push_back({"mc-" + std::to_string(i), ScoreKind::multiclass, std::nullopt, multiclass.accuracy,
                          multiclass.sharpness, correlation});
  for (int i = 1; i <= 3; ++i)
    cfg.models.push_back({"bin-" + std::to_string(i), ScoreKind::binary, std::nullopt, binary.accuracy,
                          binary.sharpness, correlation});
  for (std::size_t c = 1; c <= cfg.k; ++c) {
    const ClassIndex target{static_cast<std::int32_t>(c)};
    cfg.models.push_back({"pm-" + taxonomy.name_of(target), ScoreKind::per_manipulation, target,
                          specialist_accuracy[c - 1], specialist_sharpness, correlation});
  }
  return cfg;
}

}  // namespace

std::span<const std::string_view> preset_names() noexcept { return kPresetNames; }

OracleConfig preset(std::string_view name, std::uint64_t seed) {
  constexpr std::size_t k = 5;
  auto uniform = [](double a) { return std::vector<std::vector<double>>(k, std::vector<double>{a}); };
  if (name == "confident")
    return standard_roster("confident", seed, {{0.98}, 12.0}, {{0.98}, 12.0}, uniform(0.999), 12.0, 0.0);
  if (name == "weak-diverse")
    return standard_roster("weak-diverse", seed, {{0.75}, 2.0}, {{0.75}, 2.0}, uniform(0.75), 2.0, 0.0);
  if (name == "weak-correlated")
    return standard_roster("weak-correlated", seed, {{0.75}, 2.0}, {{0.75}, 2.0}, uniform(0.75), 2.0, 0.9);
  if (name == "specialists") {
    // Specialist c is sharp on real faces and on its own manipulation, weaker
    // on the other manipulations.
    std::vector<std::vector<double>> acc;
    for (std::size_t c = 1; c <= k; ++c) {
      std::vector<double> a(k + 1, 0.8);
      a[0] = 0.97;
      a[c] = 0.97;
      acc.push_back(std::move(a));
    }
    return standard_roster("specialists", seed, {{0.75}, 2.0}, {{0.75}, 2.0}, acc, 6.0, 0.0);
  }
  std::string known;
  for (auto n : kPresetNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw_invalid("unknown preset \"" + std::string(name) + "\" (known: " + known + ")");
}

OracleConfig oracle_config_from_json(std::string_view text) {
  using json = nlohmann::json;
  OracleConfig cfg;
  try {
    const json doc = json::parse(text);
    cfg.dataset_name = doc.value("dataset_name", cfg.dataset_name);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.k = doc.value("k", cfg.k);
    cfg.samples_per_class = doc.value("samples_per_class", cfg.samples_per_class);
    cfg.faces_per_video = doc.value("faces_per_video", cfg.faces_per_video);
    for (const auto& m : doc.at("models")) {
      ModelSpec spec;
      spec.model_id = m.at("model_id").get<std::string>();
      spec.kind = parse_score_kind(m.at("kind").get<std::string>());
      if (m.contains("target")) spec.target = ClassIndex{m.at("target").get<std::int32_t>()};
      const auto& acc = m.at("accuracy");
      spec.accuracy = acc.is_array() ? acc.get<std::vector<double>>() : std::vector<double>{acc.get<double>()};
      spec.sharpness = m.value("sharpness", spec.sharpness);
      spec.correlation = m.value("correlation", spec.correlation);
      cfg.models.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw_invalid(std::string("oracle config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string oracle_config_to_json(const OracleConfig& cfg) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["dataset_name"] = cfg.dataset_name;
  doc["seed"] = cfg.seed;
  doc["k"] = cfg.k;
  doc["samples_per_class"] = cfg.samples_per_class;
  doc["faces_per_video"] = cfg.faces_per_video;
  doc["models"] = json::array();
  for (const auto& m : cfg.models) {
    json jm;
    jm["model_id"] = m.model_id;
    jm["kind"] = to_string(m.kind);
    if (m.target) jm["target"] = m.target->value;
    jm["accuracy"] = m.accuracy;
    jm["sharpness"] = m.sharpness;
    jm["correlation"] = m.correlation;
    doc["models"].push_back(std::move(jm));
  }
  return doc.dump(2) + "\n";
}

}  // namespace ensdet
