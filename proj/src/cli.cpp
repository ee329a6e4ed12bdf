#include "ensdet/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ensdet/evaluation.hpp"
#include "ensdet/oracle.hpp"
#include "ensdet/report.hpp"
#include "ensdet/score_io.hpp"
#include "ensdet/threshold_search.hpp"

namespace ensdet::cli {

namespace {

namespace fs = std::filesystem;

// Everything a subcommand may consume; which fields are required depends on
// the command.
struct RunSpec {
  std::string manifest;
  std::string scores;
  std::string design;
  double threshold = 0.5;
  std::string grid;
  std::string task;
  std::string level = "face";
  bool strict = false;
  bool lenient = false;
  std::vector<std::string> models;
  std::string out;
  std::string report;
  bool table = false;
  unsigned jobs = 1;
  double video_threshold = 0.5;
  std::string face_reducer = "mean";
  std::string identity_reducer = "max";
  std::string preset;
  std::string config;
  std::uint64_t seed = 0;
  std::size_t samples_per_class = 0;
};

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path + " for writing");
  f << content;
  if (!f) throw Error(ErrorKind::io, "failed writing " + path);
}

MetricMode metric_mode(const RunSpec& spec) { return spec.lenient ? MetricMode::lenient : MetricMode::strict; }

AggregationPolicy aggregation_policy(const RunSpec& spec) {
  AggregationPolicy p;
  p.face = parse_reducer(spec.face_reducer);
  p.identity = parse_reducer(spec.identity_reducer);
  p.video_threshold = spec.video_threshold;
  p.validate();
  return p;
}

struct Inputs {
  DatasetManifest manifest;
  ScoreSet scores;
};

Inputs load_inputs(const RunSpec& spec) {
  Inputs in;
  in.manifest = read_manifest(fs::path(spec.manifest));
  in.scores = read_scores(fs::path(spec.scores), &in.manifest);
  return in;
}

int cmd_validate(const RunSpec& spec, std::ostream& out) {
  using json = nlohmann::ordered_json;
  json doc;
  json violations = json::array();
  auto add_error = [&](const Error& e) {
    json v;
    if (const auto* fe = dynamic_cast<const FormatError*>(&e)) {
      v["source"] = fe->source();
      v["line"] = fe->line();
      v["message"] = fe->detail();
    } else {
      v["message"] = e.what();
    }
    violations.push_back(std::move(v));
  };

  std::optional<DatasetManifest> manifest;
  try {
    manifest = read_manifest(fs::path(spec.manifest));
    doc["manifest"] = {{"path", spec.manifest},
                       {"dataset", manifest->dataset_name},
                       {"taxonomy", manifest->taxonomy.name()},
                       {"label_mode", to_string(manifest->label_mode)},
                       {"records", manifest->records.size()}};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    add_error(e);
  }

  if (manifest && !spec.scores.empty()) {
    try {
      const ScoreSet scores = read_scores(fs::path(spec.scores), &*manifest);
      json roster = json::array();
      for (const auto& m : scores.roster()) roster.push_back(m.model_id);
      doc["scores"] = {{"path", spec.scores}, {"models", roster}, {"rows", scores.row_count()}};
      std::vector<std::size_t> all(scores.roster().size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      for (const auto& msg : coverage_violations(*manifest, scores, all)) violations.push_back({{"message", msg}});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io) throw;
      add_error(e);
    }
  }

  const bool ok = violations.empty();
  json result;
  result["format"] = "ensdet-validation";
  result["format_version"] = 1;
  result["status"] = ok ? "ok" : "invalid";
  for (auto& [key, value] : doc.items()) result[key] = value;
  result["violations"] = std::move(violations);
  write_output(spec.out, result.dump(2) + "\n", out);
  return ok ? kExitOk : kExitValidation;
}

EvaluationOptions evaluation_options(const RunSpec& spec) {
  EvaluationOptions o;
  o.design = parse_design(spec.design);
  o.threshold = spec.threshold;
  o.task = parse_task(spec.task);
  o.level = parse_level(spec.level);
  o.mode = metric_mode(spec);
  o.aggregation = aggregation_policy(spec);
  o.models = spec.models;
  o.jobs = spec.jobs;
  return o;
}

int cmd_evaluate(const RunSpec& spec, std::ostream& out) {
  const EvaluationOptions options = evaluation_options(spec);
  const Inputs in = load_inputs(spec);
  const EvaluationResult result = evaluate(in.manifest, in.scores, options);
  if (spec.table) {
    out << render_report_table(result);
    if (!spec.out.empty()) write_output(spec.out, render_report(result), out);
  } else {
    write_output(spec.out, render_report(result), out);
  }
  return kExitOk;
}

int cmd_sweep(const RunSpec& spec, std::ostream& out) {
  SweepOptions options;
  options.design = parse_design(spec.design);
  options.task = parse_task(spec.task);
  options.mode = metric_mode(spec);
  options.models = spec.models;
  options.jobs = spec.jobs;
  const auto grid = spec.grid.empty() ? default_grid() : parse_grid(spec.grid);
  const Inputs in = load_inputs(spec);
  const SweepResult result = sweep(in.manifest, in.scores, grid, options);
  write_output(spec.out, render_sweep_csv(result), out);
  return kExitOk;
}

int cmd_aggregate(const RunSpec& spec, std::ostream& out) {
  const Design design = parse_design(spec.design);
  const AggregationPolicy policy = aggregation_policy(spec);
  const Inputs in = load_inputs(spec);
  const EnsembleConfig config{design, in.manifest.taxonomy.manipulation_count(), spec.threshold};
  const auto roster = select_roster(in.scores, design, spec.models);
  const auto decisions = decide_all(in.manifest, in.scores, roster, config, spec.jobs);
  const auto verdicts = aggregate_videos(in.manifest, decisions, policy);
  write_output(spec.out, render_verdicts(verdicts), out);

  if (!spec.report.empty()) {
    EvaluationOptions options;
    options.design = design;
    options.threshold = spec.threshold;
    options.task = Task::detection;
    options.level = Level::video;
    options.mode = metric_mode(spec);
    options.aggregation = policy;
    options.models = spec.models;
    options.jobs = spec.jobs;
    write_output(spec.report, render_report(evaluate(in.manifest, in.scores, options)), out);
  }
  return kExitOk;
}

// Fraction of rows whose argmax is the correct answer for that model.
std::vector<double> model_accuracies(const SyntheticData& data) {
  const auto& roster = data.scores.roster();
  std::vector<std::uint64_t> hits(roster.size(), 0);
  std::vector<std::uint64_t> seen(roster.size(), 0);
  std::unordered_map<std::string_view, std::size_t> truth;
  for (const auto& r : data.manifest.records) truth[r.sample_id] = static_cast<std::size_t>(r.label_y->value);
  for (const auto& e : data.scores.entries()) {
    const std::size_t c = truth.at(e.sample_id);
    const ModelInfo& m = roster[e.model];
    std::size_t expected = c;
    if (m.kind == ScoreKind::binary) expected = c == 0 ? 0 : 1;
    if (m.kind == ScoreKind::per_manipulation) expected = c == static_cast<std::size_t>(m.target->value) ? 1 : 0;
    hits[e.model] += argmax(data.scores.values(e)) == expected ? 1 : 0;
    ++seen[e.model];
  }
  std::vector<double> acc(roster.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = static_cast<double>(hits[i]) / static_cast<double>(seen[i]);
  return acc;
}

int cmd_simulate(const RunSpec& spec, std::ostream& out) {
  OracleConfig cfg;
  if (!spec.config.empty()) {
    std::ifstream f(spec.config, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot open " + spec.config);
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    cfg = oracle_config_from_json(text);
  } else {
    cfg = preset(spec.preset, spec.seed);
  }
  if (!spec.config.empty() && spec.seed != 0) cfg.seed = spec.seed;
  if (spec.samples_per_class > 0) cfg.samples_per_class = spec.samples_per_class;

  const SyntheticData data = generate(cfg, spec.jobs);
  const fs::path dir(spec.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  const fs::path manifest_path = dir / "manifest.tsv";
  const fs::path scores_path = dir / "scores.tsv";
  write_manifest(manifest_path, data.manifest);
  write_scores(scores_path, data.scores);
  write_output((dir / "oracle.json").string(), oracle_config_to_json(cfg), out);

  out << "dataset\t" << data.manifest.dataset_name << '\n';
  out << "seed\t" << cfg.seed << '\n';
  out << "classes\t" << data.manifest.taxonomy.class_count() << '\n';
  out << "samples\t" << data.manifest.records.size() << '\n';
  out << "score_rows\t" << data.scores.row_count() << '\n';
  const auto acc = model_accuracies(data);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", acc[i]);
    out << "model_accuracy\t" << data.scores.roster()[i].model_id << '\t' << buf << '\n';
  }
  out << "digest\t" << manifest_path.string() << '\t' << file_digest(manifest_path.string()) << '\n';
  out << "digest\t" << scores_path.string() << '\t' << file_digest(scores_path.string()) << '\n';
  return kExitOk;
}

void add_design_options(CLI::App* cmd, RunSpec& spec) {
  cmd->add_option("--design", spec.design, "Ensemble design")
      ->required()
      ->check(CLI::IsMember({"binary-soft", "multiclass-soft", "one-vs-real", "one-vs-rest"}));
  cmd->add_option("--models", spec.models, "Comma-separated roster (default: every model of the design's kind)")
      ->delimiter(',');
  cmd->add_option("--jobs", spec.jobs, "Worker threads; output does not depend on it")
      ->check(CLI::Range(1u, 1024u));
}

void add_input_options(CLI::App* cmd, RunSpec& spec, bool scores_required) {
  cmd->add_option("--manifest", spec.manifest, "Dataset manifest")->required();
  auto* scores = cmd->add_option("--scores", spec.scores, "Score file");
  if (scores_required) scores->required();
}

void add_mode_flags(CLI::App* cmd, RunSpec& spec) {
  auto* strict = cmd->add_flag("--strict", spec.strict, "Fail on classes without samples (default)");
  auto* lenient = cmd->add_flag("--lenient", spec.lenient, "Drop classes without samples from the average");
  strict->excludes(lenient);
}

void add_aggregation_options(CLI::App* cmd, RunSpec& spec) {
  cmd->add_option("--video-threshold", spec.video_threshold, "Video is fake when its score exceeds this")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--face-reducer", spec.face_reducer, "Faces -> identity score")
      ->check(CLI::IsMember({"mean", "max", "median"}));
  cmd->add_option("--identity-reducer", spec.identity_reducer, "Identities -> video score")
      ->check(CLI::IsMember({"mean", "max", "median"}));
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return kExitUsage;
    case ErrorKind::validation: return kExitValidation;
    case ErrorKind::data_mismatch: return kExitMismatch;
    case ErrorKind::io: return kExitIo;
  }
  return kExitIo;
}

std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score-level ensemble decisions and balanced-accuracy evaluation for face-forgery detectors",
               "ensdet"};
  app.require_subcommand(1);
  RunSpec spec;

  auto* validate = app.add_subcommand("validate", "Check a manifest and optionally a score file");
  add_input_options(validate, spec, false);
  validate->add_option("--out", spec.out, "Write the validation report here (default stdout)");
  validate->add_option("--jobs", spec.jobs, "Accepted for uniformity; validation is single-pass")
      ->check(CLI::Range(1u, 1024u));

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Balanced accuracy of one ensemble on one dataset");
  add_input_options(evaluate_cmd, spec, true);
  add_design_options(evaluate_cmd, spec);
  evaluate_cmd->add_option("--threshold", spec.threshold, "Max-pooling threshold t")->check(CLI::Range(0.0, 1.0));
  evaluate_cmd->add_option("--task", spec.task, "detection or attribution")
      ->required()
      ->check(CLI::IsMember({"detection", "attribution"}));
  evaluate_cmd->add_option("--level", spec.level, "face or video")->check(CLI::IsMember({"face", "video"}));
  add_mode_flags(evaluate_cmd, spec);
  add_aggregation_options(evaluate_cmd, spec);
  evaluate_cmd->add_option("--out", spec.out, "Report path (default stdout)");
  evaluate_cmd->add_flag("--table", spec.table, "Print a human-readable table");

  auto* sweep_cmd = app.add_subcommand("sweep", "Balanced accuracy across a threshold grid");
  add_input_options(sweep_cmd, spec, true);
  add_design_options(sweep_cmd, spec);
  sweep_cmd->add_option("--grid", spec.grid, "lo:hi:step (default 0.05:0.95:0.05)");
  sweep_cmd->add_option("--task", spec.task, "Objective for the best threshold")
      ->required()
      ->check(CLI::IsMember({"detection", "attribution"}));
  add_mode_flags(sweep_cmd, spec);
  sweep_cmd->add_option("--out", spec.out, "CSV path (default stdout)");

  auto* aggregate_cmd = app.add_subcommand("aggregate", "Per-video verdicts from face decisions");
  add_input_options(aggregate_cmd, spec, true);
  add_design_options(aggregate_cmd, spec);
  aggregate_cmd->add_option("--threshold", spec.threshold, "Max-pooling threshold t")->check(CLI::Range(0.0, 1.0));
  add_aggregation_options(aggregate_cmd, spec);
  add_mode_flags(aggregate_cmd, spec);
  aggregate_cmd->add_option("--out", spec.out, "Verdict file (default stdout)");
  aggregate_cmd->add_option("--report", spec.report, "Also write a video-level detection report here");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic manifest and score file");
  auto* preset_opt = simulate->add_option("--preset", spec.preset, "Named oracle preset");
  auto* config_opt = simulate->add_option("--config", spec.config, "Oracle config (JSON)");
  preset_opt->excludes(config_opt);
  simulate->add_option("--seed", spec.seed, "Random seed");
  simulate->add_option("--samples-per-class", spec.samples_per_class, "Override samples per class");
  simulate->add_option("--out", spec.out, "Output directory")->required();
  simulate->add_option("--jobs", spec.jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (simulate->parsed() && spec.preset.empty() && spec.config.empty())
      throw CLI::RequiredError("--preset or --config");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(spec, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(spec, out);
    if (sweep_cmd->parsed()) return cmd_sweep(spec, out);
    if (aggregate_cmd->parsed()) return cmd_aggregate(spec, out);
    if (simulate->parsed()) return cmd_simulate(spec, out);
  } catch (const Error& e) {
    err << "ensdet: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "ensdet: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace ensdet::cli
