#include <doctest.h>

#include <algorithm>

#include "ensdet/aggregation.hpp"
#include "support.hpp"

using namespace ensdet;
using namespace ensdet::testing;

TEST_CASE("identity aggregation") {
  const std::vector<double> scores{0.2, 0.4, 0.6};
  CHECK(aggregate_identity(scores) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(aggregate_identity(std::vector<double>{0.7}) == 0.7);
  CHECK(aggregate_identity(std::vector<double>{0.6, 0.2, 0.4}) == aggregate_identity(scores));
  CHECK(aggregate_identity(scores, Reducer::max) == 0.6);
  CHECK(aggregate_identity(scores, Reducer::median) == 0.4);
  CHECK(aggregate_identity(std::vector<double>{0.1, 0.3}, Reducer::median) == doctest::Approx(0.2));
  CHECK_THROWS_AS(aggregate_identity(std::vector<double>{}), Error);
  CHECK_THROWS_AS(aggregate_identity(std::vector<double>{1.5}), Error);
}

TEST_CASE("video aggregation") {
  const VideoVerdict v = aggregate_video("v", {{"A", 0.4}, {"B", 0.9}}, 2);
  CHECK(v.video_fake_score == 0.9);
  CHECK(v.video_z_hat == DetectionLabel::fake);
  CHECK(v.contributing_faces == 2);

  const VideoVerdict one = aggregate_video("v", {{"A", 0.4}}, 1);
  CHECK(one.video_fake_score == 0.4);
  CHECK(one.video_z_hat == DetectionLabel::real);

  CHECK(aggregate_video("v", {{"A", 0.5}}, 1).video_z_hat == DetectionLabel::real);
  CHECK(aggregate_video("v", {{"A", 0.5}}, 1, {Reducer::mean, Reducer::max, 0.4}).video_z_hat ==
        DetectionLabel::fake);
  CHECK_THROWS_AS(aggregate_video("v", {}, 1), Error);
  CHECK_THROWS_AS(aggregate_video("v", {{"A", 0.5}}, 0), Error);
  CHECK_THROWS_AS(AggregationPolicy({Reducer::mean, Reducer::max, 1.5}).validate(), Error);
}

TEST_CASE("reducer names") {
  for (Reducer r : {Reducer::mean, Reducer::max, Reducer::median}) CHECK(parse_reducer(to_string(r)) == r);
  CHECK_THROWS_AS(parse_reducer("min"), Error);
}

TEST_CASE("video aggregation matches a max-and-threshold reference") {
  Rng rng(21);
  for (int n = 0; n < 2000; ++n) {
    std::map<std::string, double> ids;
    const std::size_t count = pick(rng, 1, 6);
    double best = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double s = uniform(rng);
      ids["p" + std::to_string(i)] = s;
      best = std::max(best, s);
    }
    const double t = uniform(rng);
    const VideoVerdict v = aggregate_video("v", ids, count, {Reducer::mean, Reducer::max, t});
    CHECK(v.video_fake_score == best);
    CHECK(v.video_z_hat == (best > t ? DetectionLabel::fake : DetectionLabel::real));
    CHECK(v.per_identity_scores == ids);
  }
}

TEST_CASE("face aggregation groups by video and identity") {
  const std::vector<FaceScore> faces{
      {"v2", "a", 0.2}, {"v1", "x", 0.9}, {"v2", "a", 0.4}, {"v2", "b", 0.6}, {"v1", "x", 0.7},
  };
  const auto verdicts = aggregate_faces(faces);
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[0].video_id == "v1");
  CHECK(verdicts[0].video_fake_score == doctest::Approx(0.8));
  CHECK(verdicts[0].contributing_faces == 2);
  CHECK(verdicts[1].video_id == "v2");
  CHECK(verdicts[1].per_identity_scores.at("a") == doctest::Approx(0.3));
  CHECK(verdicts[1].video_fake_score == 0.6);
  CHECK(verdicts[1].video_z_hat == DetectionLabel::fake);
  CHECK(verdicts[1].contributing_faces == 3);
}

TEST_CASE("face aggregation is order invariant and monotone") {
  Rng rng(22);
  for (int n = 0; n < 500; ++n) {
    std::vector<FaceScore> faces;
    const std::size_t videos = pick(rng, 1, 3);
    static const char* vids[] = {"va", "vb", "vc"};
    static const char* pids[] = {"p0", "p1", "p2", "p3"};
    for (std::size_t i = 0, m = pick(rng, 1, 30); i < m; ++i)
      faces.push_back({vids[pick(rng, 0, videos - 1)], pids[pick(rng, 0, 3)], uniform(rng)});
    const AggregationPolicy policy{static_cast<Reducer>(n % 3), static_cast<Reducer>((n / 3) % 3), 0.5};
    const auto base = aggregate_faces(faces, policy);
    auto shuffled = faces;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(aggregate_faces(shuffled, policy) == base);

    auto raised = faces;
    const std::size_t i = pick(rng, 0, faces.size() - 1);
    raised[i].fake_score = std::min(1.0, raised[i].fake_score + uniform(rng));
    const auto after = aggregate_faces(raised, policy);
    for (std::size_t v = 0; v < base.size(); ++v) CHECK(after[v].video_fake_score >= base[v].video_fake_score);
  }
}
