#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ensdet/labels.hpp"

namespace ensdet {

enum class Reducer { mean, max, median };
std::string_view to_string(Reducer reducer) noexcept;
Reducer parse_reducer(std::string_view text);

// Faces fold into identities with `face`, identities fold into the video with
// `identity`. The video is fake when its score strictly exceeds the threshold.
struct AggregationPolicy {
  Reducer face = Reducer::mean;
  Reducer identity = Reducer::max;
  double video_threshold = 0.5;

  void validate() const;
};

struct VideoVerdict {
  std::string video_id;
  std::map<std::string, double> per_identity_scores;
  double video_fake_score = 0.0;
  DetectionLabel video_z_hat = DetectionLabel::real;
  std::size_t contributing_faces = 0;

  friend bool operator==(const VideoVerdict&, const VideoVerdict&) = default;
};

// Order-independent reduction of a non-empty score list.
double reduce_scores(std::span<const double> scores, Reducer reducer);

double aggregate_identity(std::span<const double> face_scores, Reducer reducer = Reducer::mean);

VideoVerdict aggregate_video(std::string video_id, const std::map<std::string, double>& identity_scores,
                             std::size_t contributing_faces, const AggregationPolicy& policy = {});

struct FaceScore {
  std::string_view video_id;
  std::string_view identity_id;
  double fake_score = 0.0;
};

// One verdict per video, ordered by video id.
std::vector<VideoVerdict> aggregate_faces(std::span<const FaceScore> faces,
                                          const AggregationPolicy& policy = {});

}  // namespace ensdet
