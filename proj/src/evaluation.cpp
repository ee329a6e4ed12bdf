#include "ensdet/evaluation.hpp"

#include <algorithm>
#include <unordered_map>

#include "ensdet/error.hpp"
#include "ensdet/parallel.hpp"

namespace ensdet {

std::string_view to_string(Level level) noexcept { return level == Level::face ? "face" : "video"; }

Level parse_level(std::string_view text) {
  if (text == "face") return Level::face;
  if (text == "video") return Level::video;
  throw_invalid("unknown level \"" + std::string(text) + "\"");
}

std::vector<std::size_t> select_roster(const ScoreSet& scores, Design design,
                                       std::span<const std::string> model_filter) {
  const ScoreKind kind = required_kind(design);
  const auto& models = scores.roster();
  std::vector<std::size_t> roster;
  if (model_filter.empty()) {
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i].kind == kind) roster.push_back(i);
    }
    if (roster.empty())
      throw_mismatch("score file has no " + std::string(to_string(kind)) + " models for design " +
                     std::string(to_string(design)));
  } else {
    for (const auto& id : model_filter) {
      const auto m = scores.find_model(id);
      if (!m) throw_mismatch("unknown model \"" + id + "\"");
      if (models[*m].kind != kind)
        throw_mismatch("model \"" + id + "\" is " + std::string(to_string(models[*m].kind)) + ", design " +
                       std::string(to_string(design)) + " needs " + std::string(to_string(kind)) + " models");
      if (std::find(roster.begin(), roster.end(), *m) != roster.end())
        throw_mismatch("model \"" + id + "\" listed twice");
      roster.push_back(*m);
    }
  }

  if (kind == ScoreKind::per_manipulation) {
    std::stable_sort(roster.begin(), roster.end(), [&](std::size_t a, std::size_t b) {
      return models[a].target->value < models[b].target->value;
    });
    const std::size_t k = scores.taxonomy().manipulation_count();
    bool one_per_class = roster.size() == k;
    for (std::size_t i = 0; one_per_class && i < roster.size(); ++i)
      one_per_class = models[roster[i]].target->value == static_cast<std::int32_t>(i + 1);
    if (!one_per_class)
      throw_mismatch("design " + std::string(to_string(design)) + " needs exactly one per-manipulation model for each of the " +
                     std::to_string(k) + " manipulation classes; got " + std::to_string(roster.size()) +
                     " (select a complete set with --models)");
  }
  return roster;
}

void check_task_support(const DatasetManifest& manifest, Design design, Task task, Level level) {
  if (task == Task::attribution) {
    if (design == Design::binary_soft)
      throw_mismatch("binary-soft ensembles cannot attribute manipulations; use the detection task");
    if (manifest.label_mode != LabelMode::full)
      throw_mismatch("manifest \"" + manifest.dataset_name +
                     "\" carries detection labels only; the attribution task needs attribution labels");
    if (level == Level::video) throw_invalid("attribution is evaluated at face level only");
  }
}

std::vector<Decision> decide_all(const DatasetManifest& manifest, const ScoreSet& scores,
                                 std::span<const std::size_t> roster, const EnsembleConfig& config,
                                 unsigned jobs) {
  config.validate();
  std::vector<Decision> decisions(manifest.records.size());
  parallel_chunks(decisions.size(), jobs, [&](ChunkRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const ScoreTensor tensor = assemble_tensor(manifest.records[i].sample_id, roster, scores);
      decisions[i] = combine(tensor, config);
    }
  });
  return decisions;
}

std::vector<VideoVerdict> aggregate_videos(const DatasetManifest& manifest, std::span<const Decision> decisions,
                                           const AggregationPolicy& policy) {
  if (decisions.size() != manifest.records.size())
    throw_invalid("need one decision per manifest record");
  std::vector<FaceScore> faces;
  faces.reserve(decisions.size());
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const FaceRecord& r = manifest.records[i];
    faces.push_back({r.video_id, r.identity_id, decisions[i].fake_score});
  }
  return aggregate_faces(faces, policy);
}

std::map<std::string, DetectionLabel> video_labels(const DatasetManifest& manifest) {
  std::map<std::string, DetectionLabel> labels;
  for (const auto& r : manifest.records) {
    if (!r.label_z) throw_mismatch("sample \"" + r.sample_id + "\" has no detection label");
    auto [it, inserted] = labels.try_emplace(r.video_id, *r.label_z);
    if (*r.label_z == DetectionLabel::fake) it->second = DetectionLabel::fake;
  }
  return labels;
}

namespace {

std::size_t truth_index(const FaceRecord& r, Task task) {
  return task == Task::detection ? static_cast<std::size_t>(as_int(*r.label_z))
                                 : static_cast<std::size_t>(r.label_y->value);
}

std::size_t pred_index(const Decision& d, Task task) {
  return task == Task::detection ? static_cast<std::size_t>(as_int(d.z_hat))
                                 : static_cast<std::size_t>(d.y_hat.value);
}

}  // namespace

EvaluationResult evaluate(const DatasetManifest& manifest, const ScoreSet& scores,
                          const EvaluationOptions& options) {
  if (!(manifest.taxonomy == scores.taxonomy()))
    throw_mismatch("manifest and score file use different taxonomies");
  check_task_support(manifest, options.design, options.task, options.level);
  options.aggregation.validate();

  const EnsembleConfig config{options.design, manifest.taxonomy.manipulation_count(), options.threshold};
  config.validate();
  const auto roster = select_roster(scores, options.design, options.models);

  EvaluationResult result;
  result.dataset = manifest.dataset_name;
  result.design = options.design;
  result.threshold = options.threshold;
  result.task = options.task;
  result.level = options.level;
  result.mode = options.mode;
  for (std::size_t m : roster) result.models.push_back(scores.roster()[m].model_id);
  if (options.task == Task::detection) {
    result.class_names = {"real", "fake"};
  } else {
    result.class_names = manifest.taxonomy.class_names();
  }
  const std::size_t classes = result.class_names.size();

  if (options.level == Level::face) {
    const std::size_t n = manifest.records.size();
    std::vector<ConfusionMatrix> partial(chunk_count(n, options.jobs), ConfusionMatrix(classes));
    parallel_chunks(n, options.jobs, [&](ChunkRange r) {
      for (std::size_t i = r.begin; i < r.end; ++i) {
        const FaceRecord& rec = manifest.records[i];
        const Decision d = combine(assemble_tensor(rec.sample_id, roster, scores), config);
        partial[r.index].add(truth_index(rec, options.task), pred_index(d, options.task));
      }
    });
    ConfusionMatrix cm(classes);
    for (const auto& p : partial) cm.merge(p);
    result.confusion = std::move(cm);
  } else {
    const auto decisions = decide_all(manifest, scores, roster, config, options.jobs);
    const auto verdicts = aggregate_videos(manifest, decisions, options.aggregation);
    const auto labels = video_labels(manifest);
    ConfusionMatrix cm(2);
    for (const auto& v : verdicts)
      cm.add(static_cast<std::size_t>(as_int(labels.at(v.video_id))), static_cast<std::size_t>(as_int(v.video_z_hat)));
    result.confusion = std::move(cm);
  }
  result.metrics = task_metrics(options.task, result.confusion, options.mode);
  return result;
}

}  // namespace ensdet
