#include <doctest.h>

#include <sstream>

#include "ensdet/oracle.hpp"
#include "support.hpp"

using namespace ensdet;

namespace {

std::string serialize(const SyntheticData& d) {
  std::ostringstream out;
  write_manifest(out, d.manifest);
  write_scores(out, d.scores);
  return out.str();
}

// Share of rows whose argmax is what a perfect model of that kind would say.
double accuracy(const SyntheticData& d, std::size_t model) {
  const ModelInfo& m = d.scores.roster()[model];
  std::size_t hits = 0;
  for (const auto& r : d.manifest.records) {
    const auto row = *d.scores.find(r.sample_id, model);
    std::size_t want = static_cast<std::size_t>(r.label_y->value);
    if (m.kind == ScoreKind::binary) want = want == 0 ? 0 : 1;
    if (m.kind == ScoreKind::per_manipulation) want = r.label_y == m.target ? 1 : 0;
    hits += argmax(row) == want ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(d.manifest.records.size());
}

}  // namespace

TEST_CASE("presets") {
  for (auto name : preset_names()) CHECK_NOTHROW(preset(name).validate());
  CHECK_THROWS_AS(preset("nope"), Error);

  const OracleConfig confident = preset("confident");
  for (std::size_t m = 0; m < confident.models.size(); ++m) {
    for (std::size_t c = 0; c <= confident.k; ++c) CHECK(confident.accuracy(m, c) >= 0.97);
    CHECK(confident.models[m].correlation == 0.0);
  }
  for (const char* name : {"weak-diverse", "weak-correlated"}) {
    const OracleConfig cfg = preset(name);
    CHECK(cfg.k == 5);
    CHECK(cfg.samples_per_class == 2000);
    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
      CHECK(cfg.accuracy(m, 0) == 0.75);
      CHECK(cfg.models[m].correlation == (std::string(name) == "weak-diverse" ? 0.0 : 0.9));
    }
  }
}

TEST_CASE("config validation") {
  OracleConfig cfg = preset("weak-diverse");
  cfg.samples_per_class = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = preset("weak-diverse");
  cfg.models[0].accuracy = {1.0};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = preset("weak-diverse");
  cfg.models[0].accuracy = {0.5, 0.5};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = preset("weak-diverse");
  cfg.models[0].sharpness = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = preset("weak-diverse");
  cfg.models[0].correlation = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("generation is deterministic under any job count") {
  OracleConfig cfg = preset("specialists", 77);
  cfg.samples_per_class = 50;
  const std::string one = serialize(generate(cfg, 1));
  CHECK(serialize(generate(cfg, 1)) == one);
  CHECK(serialize(generate(cfg, 6)) == one);
  cfg.seed = 78;
  CHECK(serialize(generate(cfg, 1)) != one);
}

TEST_CASE("generated data passes validation") {
  OracleConfig cfg = preset("confident", 7);
  cfg.samples_per_class = 30;
  const SyntheticData d = generate(cfg, 2);
  CHECK(validate_manifest(d.manifest).empty());
  std::vector<std::size_t> all(d.scores.roster().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  CHECK(coverage_violations(d.manifest, d.scores, all).empty());
  std::ostringstream m, s;
  write_manifest(m, d.manifest);
  write_scores(s, d.scores);
  std::istringstream mi(m.str()), si(s.str());
  const DatasetManifest back = read_manifest(mi);
  CHECK(read_scores(si, &back).row_count() == d.scores.row_count());
}

TEST_CASE("measured accuracy tracks the target") {
  // 12,000 draws at p = 0.75 have a standard deviation of about 0.004, so a
  // 0.02 window is roughly five sigma.
  std::size_t seeds_ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    OracleConfig cfg = preset("weak-diverse", seed);
    cfg.models.resize(1);
    const SyntheticData d = generate(cfg, 4);
    if (std::fabs(accuracy(d, 0) - 0.75) <= 0.02) ++seeds_ok;
  }
  CHECK(seeds_ok >= 19);
}

TEST_CASE("sharpness controls the peak") {
  OracleConfig cfg = preset("weak-diverse", 3);
  cfg.samples_per_class = 100;
  cfg.models.resize(1);
  auto mean_peak = [&](double sharpness) {
    cfg.models[0].sharpness = sharpness;
    const SyntheticData d = generate(cfg);
    double total = 0.0;
    for (const auto& e : d.scores.entries()) {
      const auto row = d.scores.values(e);
      total += row[argmax(row)];
    }
    return total / static_cast<double>(d.scores.row_count());
  };
  CHECK(mean_peak(1.0) < mean_peak(4.0));
  CHECK(mean_peak(4.0) < mean_peak(16.0));
  CHECK(mean_peak(16.0) > 0.99);
}

TEST_CASE("correlation makes models agree more often") {
  auto agreement = [](double correlation) {
    OracleConfig cfg = preset("weak-diverse", 5);
    cfg.samples_per_class = 300;
    cfg.models.resize(2);
    for (auto& m : cfg.models) m.correlation = correlation;
    const SyntheticData d = generate(cfg);
    std::size_t same = 0;
    for (const auto& r : d.manifest.records) same += argmax(*d.scores.find(r.sample_id, 0)) == argmax(*d.scores.find(r.sample_id, 1));
    return static_cast<double>(same) / static_cast<double>(d.manifest.records.size());
  };
  CHECK(agreement(0.0) < 0.7);
  CHECK(agreement(0.9) > 0.9);
  CHECK(agreement(1.0) == 1.0);
}

TEST_CASE("config JSON round trip") {
  OracleConfig cfg = preset("specialists", 123);
  const OracleConfig back = oracle_config_from_json(oracle_config_to_json(cfg));
  CHECK(oracle_config_to_json(back) == oracle_config_to_json(cfg));
  CHECK(back.models.size() == cfg.models.size());
  CHECK(back.seed == 123);
  CHECK_THROWS_AS(oracle_config_from_json("{\"k\": \"five\"}"), Error);
  CHECK_THROWS_AS(oracle_config_from_json("not json"), Error);
}

TEST_CASE("counter-based draws") {
  CHECK(counter_uniform(1, 2, 3, 4) == counter_uniform(1, 2, 3, 4));
  CHECK(counter_uniform(1, 2, 3, 4) != counter_uniform(1, 2, 3, 5));
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = counter_uniform(9, i, 0, 0);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("synthetic taxonomy names") {
  CHECK(synthetic_taxonomy(5).class_names()[1] == "Deepfakes");
  CHECK(synthetic_taxonomy(3).class_count() == 4);
  CHECK(synthetic_taxonomy(3).name() == "synthetic-k3");
}
