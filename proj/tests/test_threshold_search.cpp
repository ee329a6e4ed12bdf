#include <doctest.h>

#include <cstdio>

#include "ensdet/evaluation.hpp"
#include "ensdet/oracle.hpp"
#include "ensdet/report.hpp"
#include "ensdet/threshold_search.hpp"
#include "support.hpp"

using namespace ensdet;
using namespace ensdet::testing;

namespace {

// K per-manipulation models; every sample gets `fake` on its own class and
// `low` elsewhere (real samples get `low` everywhere).
SyntheticData separable(std::size_t k, std::size_t per_class, double fake, double low) {
  std::vector<std::string> names{"real"};
  for (std::size_t c = 1; c <= k; ++c) names.push_back("m" + std::to_string(c));
  SyntheticData d;
  d.manifest.dataset_name = "separable";
  d.manifest.taxonomy = Taxonomy("sep", names);
  std::vector<ModelInfo> roster;
  for (std::size_t c = 1; c <= k; ++c)
    roster.push_back({"pm" + std::to_string(c), ScoreKind::per_manipulation, ClassIndex{static_cast<int>(c)}});
  d.scores = ScoreSet(d.manifest.taxonomy, roster);
  for (std::size_t y = 0; y <= k; ++y) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::string id = "s" + std::to_string(y) + "-" + std::to_string(i);
      d.manifest.records.push_back(
          {id, "v" + id, 0, "p", ClassIndex{static_cast<int>(y)}, to_detection(ClassIndex{static_cast<int>(y)})});
      for (std::size_t m = 0; m < k; ++m) {
        const double s = m + 1 == y ? fake : low;
        d.scores.add(id, m, {1.0 - s, s});
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("default grid") {
  const auto g = default_grid();
  REQUIRE(g.size() == 19);
  CHECK(g.front() == 0.05);
  CHECK(g.back() == 0.95);
  CHECK(g[1] - g[0] == doctest::Approx(0.05).epsilon(1e-12));
  for (std::size_t i = 0; i < g.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", g[i]);
    CHECK(std::stod(buf) == g[i]);
    if (i > 0) CHECK(g[i] > g[i - 1]);
  }
}

TEST_CASE("custom grids") {
  CHECK(make_grid(0.5, 0.5, 0.37) == std::vector<double>{0.5});
  CHECK(make_grid(0.05, 0.95, 0.05) == default_grid());
  CHECK(parse_grid("0.05:0.95:0.05") == default_grid());
  CHECK(make_grid(0.1, 0.9, 0.01).size() == 81);
  CHECK(make_grid(0.1, 0.9, 0.01).back() == 0.9);
  CHECK(make_grid(0.0, 1.0, 0.3) == std::vector<double>{0.0, 0.3, 0.6, 0.9});
  CHECK_THROWS_AS(make_grid(0.6, 0.5, 0.1), Error);
  CHECK_THROWS_AS(make_grid(0.1, 0.5, 0.0), Error);
  CHECK_THROWS_AS(make_grid(-0.1, 0.5, 0.1), Error);
  CHECK_THROWS_AS(parse_grid("0.1:0.5"), Error);
  CHECK_THROWS_AS(parse_grid("a:b:c"), Error);
}

TEST_CASE("separable scores give perfect accuracy across the open interval") {
  const SyntheticData d = separable(3, 20, 0.99, 0.01);
  const auto grid = make_grid(0.02, 0.98, 0.02);
  for (Task task : {Task::detection, Task::attribution}) {
    SweepOptions o;
    o.task = task;
    const SweepResult r = sweep(d.manifest, d.scores, grid, o);
    for (const auto& p : r.points) {
      CHECK(p.detection.metrics.balanced_accuracy == 1.0);
      CHECK(p.attribution->metrics.balanced_accuracy == 1.0);
    }
    CHECK(r.best_threshold == 0.02);
    CHECK(r.best_balanced_accuracy == 1.0);
  }
}

TEST_CASE("sweep matches a per-threshold brute-force evaluation") {
  OracleConfig cfg = preset("specialists", 9);
  cfg.samples_per_class = 80;
  const SyntheticData d = generate(cfg);
  const auto grid = default_grid();
  const std::size_t k = d.manifest.taxonomy.manipulation_count();
  SweepOptions o;
  o.jobs = 4;
  const SweepResult r = sweep(d.manifest, d.scores, grid, o);
  REQUIRE(r.points.size() == grid.size());
  CHECK(r.grid() == grid);

  std::vector<std::size_t> roster;
  for (std::size_t c = 1; c <= k; ++c) roster.push_back(*d.scores.find_model("pm-" + d.manifest.taxonomy.class_names()[c]));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ConfusionMatrix att(k + 1);
    for (const auto& rec : d.manifest.records) {
      const ScoreTensor t = assemble_tensor(rec.sample_id, roster, d.scores);
      const int y = reference_decision(t, Design::one_vs_real, grid[i]).y_hat;
      att.add(static_cast<std::size_t>(rec.label_y->value), static_cast<std::size_t>(y));
    }
    CHECK(r.points[i].attribution->confusion == att);
    CHECK(r.points[i].attribution->metrics.balanced_accuracy == reference_ba_attribution(att));
    CHECK(r.points[i].detection.metrics.balanced_accuracy == reference_ba_detection(att));
  }
}

TEST_CASE("best threshold: highest accuracy, ties to the smallest t") {
  OracleConfig cfg = preset("specialists", 4);
  cfg.samples_per_class = 60;
  const SyntheticData d = generate(cfg);
  SweepOptions o;
  const SweepResult r = sweep(d.manifest, d.scores, default_grid(), o);
  double best = -1.0, at = 0.0;
  for (const auto& p : r.points) {
    const double ba = p.attribution->metrics.balanced_accuracy;
    if (ba > best) {
      best = ba;
      at = p.threshold;
    }
  }
  CHECK(r.best_threshold == at);
  CHECK(r.best_balanced_accuracy == best);
}

TEST_CASE("sweep output does not depend on the job count") {
  OracleConfig cfg = preset("specialists", 5);
  cfg.samples_per_class = 50;
  const SyntheticData d = generate(cfg);
  SweepOptions o;
  o.design = Design::one_vs_rest;
  const std::string one = render_sweep_csv(sweep(d.manifest, d.scores, default_grid(), o));
  o.jobs = 7;
  CHECK(render_sweep_csv(sweep(d.manifest, d.scores, default_grid(), o)) == one);
  CHECK(one.find("threshold,ba_detection,ba_attribution\n") != std::string::npos);
}

TEST_CASE("sweep errors") {
  SyntheticData d = separable(2, 3, 0.9, 0.1);
  SweepOptions o;
  o.design = Design::multiclass_soft;
  CHECK_THROWS_AS(sweep(d.manifest, d.scores, default_grid(), o), Error);
  o.design = Design::one_vs_real;
  CHECK_THROWS_AS(sweep(d.manifest, d.scores, std::vector<double>{}, o), Error);
  d.manifest.label_mode = LabelMode::detection_only;
  for (auto& r : d.manifest.records) r.label_y.reset();
  o.task = Task::attribution;
  CHECK_THROWS_AS(sweep(d.manifest, d.scores, default_grid(), o), Error);
  o.task = Task::detection;
  const SweepResult r = sweep(d.manifest, d.scores, default_grid(), o);
  CHECK_FALSE(r.points[0].attribution);
}
