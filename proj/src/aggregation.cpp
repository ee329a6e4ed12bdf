#include "ensdet/aggregation.hpp"

#include <algorithm>
#include <vector>

#include "ensdet/error.hpp"

namespace ensdet {

std::string_view to_string(Reducer reducer) noexcept {
  switch (reducer) {
    case Reducer::mean: return "mean";
    case Reducer::max: return "max";
    case Reducer::median: return "median";
  }
  return "?";
}

Reducer parse_reducer(std::string_view text) {
  if (text == "mean") return Reducer::mean;
  if (text == "max") return Reducer::max;
  if (text == "median") return Reducer::median;
  throw_invalid("unknown reducer \"" + std::string(text) + "\"");
}

void AggregationPolicy::validate() const {
  if (!(video_threshold >= 0.0 && video_threshold <= 1.0))
    throw_invalid("video threshold must lie in [0, 1]");
}

double reduce_scores(std::span<const double> scores, Reducer reducer) {
  if (scores.empty()) throw_invalid("cannot aggregate an empty score list");
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw_invalid("fake scores must lie in [0, 1]");
  }
  // Sorting first makes every reducer independent of input order.
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  switch (reducer) {
    case Reducer::max: return sorted.back();
    case Reducer::median:
      return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    case Reducer::mean: {
      long double sum = 0.0L;
      for (double s : sorted) sum += s;
      return std::clamp(static_cast<double>(sum / static_cast<long double>(n)), 0.0, 1.0);
    }
  }
  throw_invalid("unknown reducer");
}

double aggregate_identity(std::span<const double> face_scores, Reducer reducer) {
  return reduce_scores(face_scores, reducer);
}

VideoVerdict aggregate_video(std::string video_id, const std::map<std::string, double>& identity_scores,
                             std::size_t contributing_faces, const AggregationPolicy& policy) {
  policy.validate();
  if (identity_scores.empty()) throw_invalid("video " + video_id + " has no identities");
  if (contributing_faces < identity_scores.size())
    throw_invalid("video " + video_id + " has fewer faces than identities");
  std::vector<double> scores;
  scores.reserve(identity_scores.size());
  for (const auto& [id, s] : identity_scores) scores.push_back(s);

  VideoVerdict v;
  v.video_id = std::move(video_id);
  v.per_identity_scores = identity_scores;
  v.video_fake_score = reduce_scores(scores, policy.identity);
  v.video_z_hat = v.video_fake_score > policy.video_threshold ? DetectionLabel::fake : DetectionLabel::real;
  v.contributing_faces = contributing_faces;
  return v;
}

std::vector<VideoVerdict> aggregate_faces(std::span<const FaceScore> faces, const AggregationPolicy& policy) {
  policy.validate();
  std::map<std::string_view, std::map<std::string_view, std::vector<double>>> grouped;
  for (const auto& f : faces) grouped[f.video_id][f.identity_id].push_back(f.fake_score);

  std::vector<VideoVerdict> out;
  out.reserve(grouped.size());
  for (const auto& [video, identities] : grouped) {
    std::map<std::string, double> identity_scores;
    std::size_t faces_in_video = 0;
    for (const auto& [identity, scores] : identities) {
      identity_scores.emplace(std::string(identity), aggregate_identity(scores, policy.face));
      faces_in_video += scores.size();
    }
    out.push_back(aggregate_video(std::string(video), identity_scores, faces_in_video, policy));
  }
  return out;
}

}  // namespace ensdet
