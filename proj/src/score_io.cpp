#include "ensdet/score_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

#include "ensdet/error.hpp"

namespace ensdet {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool valid_identifier(std::string_view id) {
  if (id.empty() || id == "-" || id.front() == '#') return false;
  for (char c : id) {
    if (c == '\t' || c == '\n' || c == '\r' || c == ' ') return false;
  }
  return true;
}

std::optional<double> parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_uint(std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

// Line reader that tracks 1-based line numbers and owns the error location.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // At end of input the line number moves past the last line, so errors
  // about missing content point at where it was expected.
  bool next() {
    ++number_;
    return static_cast<bool>(std::getline(in_, line_));
  }
  const std::string& line() const noexcept { return line_; }
  std::size_t number() const noexcept { return number_; }

  [[noreturn]] void fail(const std::string& message) const { throw FormatError(source_, number_, message); }

  std::vector<std::string_view> header(std::string_view key, std::size_t min_fields) {
    if (!next()) fail("unexpected end of file, expected #" + std::string(key) + " header");
    auto fields = split_tabs(line_);
    if (fields.front() != "#" + std::string(key))
      fail("expected #" + std::string(key) + " header, got \"" + std::string(fields.front()) + "\"");
    if (fields.size() < min_fields) fail("#" + std::string(key) + " header has too few fields");
    return fields;
  }

  void format_header(std::string_view kind, int version) {
    auto f = header("format", 3);
    if (f.size() != 3 || f[1] != kind) fail("not an " + std::string(kind) + " file");
    const auto v = parse_uint(f[2]);
    if (!v || *v != static_cast<std::uint64_t>(version))
      fail("unsupported format version \"" + std::string(f[2]) + "\" (expected " + std::to_string(version) + ")");
  }

  Taxonomy taxonomy_header() {
    auto f = header("taxonomy", 4);
    std::vector<std::string> classes(f.begin() + 2, f.end());
    try {
      return Taxonomy(std::string(f[1]), std::move(classes));
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  void columns_header(std::span<const std::string_view> expected) {
    auto f = header("columns", 1);
    if (f.size() != expected.size() + 1 || !std::equal(expected.begin(), expected.end(), f.begin() + 1))
      fail("unexpected #columns header");
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t number_ = 0;
};

void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy) {
  out << "#taxonomy\t" << taxonomy.name();
  for (const auto& c : taxonomy.class_names()) out << '\t' << c;
  out << '\n';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return in;
}

constexpr std::string_view kManifestColumns[] = {"sample_id", "video_id", "frame_index", "identity_id", "y", "z"};
constexpr std::string_view kScoreColumns[] = {"sample_id", "model_id", "scores"};

}  // namespace

std::string_view to_string(LabelMode mode) noexcept {
  return mode == LabelMode::full ? "full" : "detection-only";
}

LabelMode parse_label_mode(std::string_view text) {
  if (text == "full") return LabelMode::full;
  if (text == "detection-only") return LabelMode::detection_only;
  throw_invalid("unknown label mode \"" + std::string(text) + "\"");
}

std::vector<std::string> validate_manifest(const DatasetManifest& manifest) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const FaceRecord& r = manifest.records[i];
    const std::string where = "record " + std::to_string(i + 1) + " (" + r.sample_id + "): ";
    for (const auto& v : validate_record(r, manifest.taxonomy)) out.push_back(where + v.message);
    if (!seen.insert(r.sample_id).second) out.push_back(where + "duplicate sample_id");
    if (!r.label_z) out.push_back(where + "missing detection label");
    if (manifest.label_mode == LabelMode::full && !r.label_y)
      out.push_back(where + "missing attribution label in a full-label manifest");
    if (manifest.label_mode == LabelMode::detection_only && r.label_y)
      out.push_back(where + "attribution label in a detection-only manifest");
  }
  return out;
}

DatasetManifest read_manifest(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  reader.format_header("ensdet-manifest", kManifestFormatVersion);

  DatasetManifest m;
  {
    auto f = reader.header("dataset", 2);
    if (f.size() != 2 || f[1].empty()) reader.fail("#dataset header needs exactly one name");
    m.dataset_name = std::string(f[1]);
  }
  m.taxonomy = reader.taxonomy_header();
  {
    auto f = reader.header("label_mode", 2);
    if (f.size() != 2) reader.fail("#label_mode header needs exactly one value");
    try {
      m.label_mode = parse_label_mode(f[1]);
    } catch (const Error& e) {
      reader.fail(e.what());
    }
  }
  reader.columns_header(kManifestColumns);

  std::unordered_set<std::string> seen;
  while (reader.next()) {
    const auto f = split_tabs(reader.line());
    if (f.size() != std::size(kManifestColumns))
      reader.fail("expected " + std::to_string(std::size(kManifestColumns)) + " fields, got " +
                  std::to_string(f.size()));
    FaceRecord r;
    if (!valid_identifier(f[0])) reader.fail("invalid sample_id \"" + std::string(f[0]) + "\"");
    if (!valid_identifier(f[1])) reader.fail("invalid video_id \"" + std::string(f[1]) + "\"");
    if (!valid_identifier(f[3])) reader.fail("invalid identity_id \"" + std::string(f[3]) + "\"");
    r.sample_id = std::string(f[0]);
    r.video_id = std::string(f[1]);
    r.identity_id = std::string(f[3]);
    const auto frame = parse_uint(f[2]);
    if (!frame) reader.fail("frame_index \"" + std::string(f[2]) + "\" is not a non-negative integer");
    r.frame_index = *frame;

    if (f[4] != "-") {
      const auto y = m.taxonomy.find(f[4]);
      if (!y) reader.fail("unknown class name \"" + std::string(f[4]) + "\"");
      r.label_y = *y;
    }
    if (f[5] == "0") {
      r.label_z = DetectionLabel::real;
    } else if (f[5] == "1") {
      r.label_z = DetectionLabel::fake;
    } else {
      reader.fail("detection label must be 0 or 1, got \"" + std::string(f[5]) + "\"");
    }

    if (m.label_mode == LabelMode::full && !r.label_y)
      reader.fail("attribution label missing in a full-label manifest");
    if (m.label_mode == LabelMode::detection_only && r.label_y)
      reader.fail("attribution label present in a detection-only manifest");
    for (const auto& v : validate_record(r, m.taxonomy)) reader.fail(v.message);
    if (!seen.insert(r.sample_id).second) reader.fail("duplicate sample_id \"" + r.sample_id + "\"");
    m.records.push_back(std::move(r));
  }
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_manifest(in, path.string());
}

void write_manifest(std::ostream& out, const DatasetManifest& m) {
  if (const auto violations = validate_manifest(m); !violations.empty())
    throw Error(ErrorKind::validation, "refusing to write an invalid manifest: " + violations.front());
  out << "#format\tensdet-manifest\t" << kManifestFormatVersion << '\n';
  out << "#dataset\t" << m.dataset_name << '\n';
  write_taxonomy(out, m.taxonomy);
  out << "#label_mode\t" << to_string(m.label_mode) << '\n';
  out << "#columns";
  for (auto c : kManifestColumns) out << '\t' << c;
  out << '\n';
  for (const auto& r : m.records) {
    out << r.sample_id << '\t' << r.video_id << '\t' << r.frame_index << '\t' << r.identity_id << '\t'
        << (r.label_y ? m.taxonomy.name_of(*r.label_y) : std::string("-")) << '\t'
        << as_int(*r.label_z) << '\n';
  }
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  auto out = open_for_write(path);
  write_manifest(out, manifest);
}

std::optional<std::string> normalize_probability_row(std::span<double> row, RowStatus* status) {
  long double sum = 0.0L;
  for (double& v : row) {
    if (!std::isfinite(v)) return "non-finite score entry";
    if (v < 0.0 || v > 1.0) return "score entry " + format_score(v) + " outside [0, 1]";
    v += 0.0;  // -0 -> +0
    sum += v;
  }
  const long double deviation = std::fabs(sum - 1.0L);
  if (deviation > static_cast<long double>(kRowSumTolerance)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9Lg", sum);
    return std::string("row sums to ") + buf + ", outside 1 ± 1e-6";
  }
  // Rows written with 9 significant digits drift by up to half a unit per
  // entry; leave those alone so canonical files re-read unchanged.
  const long double noise = 1e-9L * static_cast<long double>(row.size());
  if (deviation > noise) {
    for (double& v : row) v = std::min(1.0, static_cast<double>(v / sum));
    if (status) *status = RowStatus::renormalized;
  } else if (status) {
    *status = RowStatus::exact;
  }
  return std::nullopt;
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

ScoreSet::ScoreSet(Taxonomy taxonomy, std::vector<ModelInfo> roster)
    : taxonomy_(std::move(taxonomy)), roster_(std::move(roster)) {
  if (roster_.empty()) throw Error(ErrorKind::validation, "score roster is empty");
  std::unordered_set<std::string_view> ids;
  for (const auto& m : roster_) {
    if (!valid_identifier(m.model_id))
      throw Error(ErrorKind::validation, "invalid model id \"" + m.model_id + "\"");
    if (!ids.insert(m.model_id).second)
      throw Error(ErrorKind::validation, "duplicate model id \"" + m.model_id + "\"");
    if (m.kind == ScoreKind::per_manipulation) {
      if (!m.target || m.target->is_real() || !taxonomy_.contains(*m.target))
        throw Error(ErrorKind::validation,
                    "per-manipulation model \"" + m.model_id + "\" needs a manipulation target class");
    } else if (m.target) {
      throw Error(ErrorKind::validation, "only per-manipulation models take a target class");
    }
  }
}

std::optional<std::size_t> ScoreSet::find_model(std::string_view model_id) const {
  for (std::size_t i = 0; i < roster_.size(); ++i) {
    if (roster_[i].model_id == model_id) return i;
  }
  return std::nullopt;
}

void ScoreSet::add(std::string sample_id, std::size_t model, std::vector<double> row) {
  if (model >= roster_.size()) throw Error(ErrorKind::validation, "model index out of range");
  if (!valid_identifier(sample_id)) throw Error(ErrorKind::validation, "invalid sample id \"" + sample_id + "\"");
  const std::size_t w = width(model);
  if (row.size() != w)
    throw Error(ErrorKind::validation, "width mismatch: model \"" + roster_[model].model_id + "\" (" +
                                           std::string(to_string(roster_[model].kind)) + ") expects " +
                                           std::to_string(w) + " scores, got " + std::to_string(row.size()));
  if (auto reason = normalize_probability_row(row)) throw Error(ErrorKind::validation, *reason);

  auto [it, inserted] = index_.try_emplace(sample_id);
  if (inserted) it->second.assign(roster_.size(), npos);
  if (it->second[model] != npos)
    throw Error(ErrorKind::validation,
                "duplicate score for (" + sample_id + ", " + roster_[model].model_id + ")");
  it->second[model] = entries_.size();
  entries_.push_back({std::move(sample_id), model, values_.size()});
  values_.insert(values_.end(), row.begin(), row.end());
}

std::optional<std::span<const double>> ScoreSet::find(std::string_view sample_id, std::size_t model) const {
  const auto it = index_.find(std::string(sample_id));
  if (it == index_.end() || model >= roster_.size() || it->second[model] == npos) return std::nullopt;
  return values(entries_[it->second[model]]);
}

ScoreSet read_scores(std::istream& in, const DatasetManifest* manifest, const std::string& source) {
  LineReader reader(in, source);
  reader.format_header("ensdet-scores", kScoresFormatVersion);
  Taxonomy taxonomy = reader.taxonomy_header();
  if (manifest && !(taxonomy == manifest->taxonomy))
    throw Error(ErrorKind::data_mismatch, source + ":" + std::to_string(reader.number()) +
                                              ": score taxonomy \"" + taxonomy.name() +
                                              "\" does not match manifest taxonomy \"" +
                                              manifest->taxonomy.name() + "\"");

  std::vector<ModelInfo> roster;
  std::optional<ScoreSet> scores;
  while (!scores) {
    if (!reader.next()) reader.fail("unexpected end of file in score header");
    const auto f = split_tabs(reader.line());
    if (f.front() == "#model") {
      if (f.size() < 3 || f.size() > 4) reader.fail("#model header needs an id, a kind and an optional target");
      ModelInfo info;
      info.model_id = std::string(f[1]);
      try {
        info.kind = parse_score_kind(f[2]);
      } catch (const Error& e) {
        reader.fail(e.what());
      }
      if (f.size() == 4) {
        const auto target = taxonomy.find(f[3]);
        if (!target) reader.fail("unknown class name \"" + std::string(f[3]) + "\"");
        info.target = *target;
      }
      roster.push_back(std::move(info));
    } else if (f.front() == "#columns") {
      if (f.size() != std::size(kScoreColumns) + 1 ||
          !std::equal(std::begin(kScoreColumns), std::end(kScoreColumns), f.begin() + 1))
        reader.fail("unexpected #columns header");
      try {
        scores.emplace(taxonomy, std::move(roster));
      } catch (const Error& e) {
        reader.fail(e.what());
      }
    } else {
      reader.fail("expected #model or #columns header");
    }
  }

  std::unordered_set<std::string_view> manifest_ids;
  if (manifest) {
    for (const auto& r : manifest->records) manifest_ids.insert(r.sample_id);
  }
  std::vector<double> row;
  while (reader.next()) {
    const auto f = split_tabs(reader.line());
    if (f.size() < 3) reader.fail("score line needs a sample id, a model id and scores");
    if (manifest && !manifest_ids.contains(f[0]))
      reader.fail("unknown sample \"" + std::string(f[0]) + "\" (not in manifest)");
    const auto model = scores->find_model(f[1]);
    if (!model) reader.fail("unknown model \"" + std::string(f[1]) + "\"");
    row.clear();
    for (std::size_t i = 2; i < f.size(); ++i) {
      const auto v = parse_double(f[i]);
      if (!v) reader.fail("malformed score \"" + std::string(f[i]) + "\"");
      row.push_back(*v);
    }
    try {
      scores->add(std::string(f[0]), *model, row);
    } catch (const Error& e) {
      reader.fail(e.what());
    }
  }
  return std::move(*scores);
}

ScoreSet read_scores(const std::filesystem::path& path, const DatasetManifest* manifest) {
  auto in = open_for_read(path);
  return read_scores(in, manifest, path.string());
}

void write_scores(std::ostream& out, const ScoreSet& scores) {
  out << "#format\tensdet-scores\t" << kScoresFormatVersion << '\n';
  write_taxonomy(out, scores.taxonomy());
  for (const auto& m : scores.roster()) {
    out << "#model\t" << m.model_id << '\t' << to_string(m.kind);
    if (m.target) out << '\t' << scores.taxonomy().name_of(*m.target);
    out << '\n';
  }
  out << "#columns";
  for (auto c : kScoreColumns) out << '\t' << c;
  out << '\n';
  for (const auto& e : scores.entries()) {
    out << e.sample_id << '\t' << scores.roster()[e.model].model_id;
    for (double v : scores.values(e)) out << '\t' << format_score(v);
    out << '\n';
  }
}

void write_scores(const std::filesystem::path& path, const ScoreSet& scores) {
  auto out = open_for_write(path);
  write_scores(out, scores);
}

ScoreTensor assemble_tensor(std::string_view sample_id, std::span<const std::size_t> roster,
                            const ScoreSet& scores) {
  if (roster.empty()) throw_invalid("empty model roster");
  const auto& models = scores.roster();
  const ScoreKind kind = models.at(roster.front()).kind;
  const std::size_t width = scores.width(roster.front());
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(roster.size());
  values.reserve(roster.size() * width);
  for (std::size_t i = 0; i < roster.size(); ++i) {
    const ModelInfo& m = models.at(roster[i]);
    if (m.kind != kind) throw_mismatch("roster mixes " + std::string(to_string(kind)) + " and " +
                                       std::string(to_string(m.kind)) + " models");
    if (kind == ScoreKind::per_manipulation &&
        m.target->value != static_cast<std::int32_t>(i + 1))
      throw_mismatch("per-manipulation roster out of order: model \"" + m.model_id + "\" targets class " +
                     std::to_string(m.target->value) + " at position " + std::to_string(i + 1));
    const auto row = scores.find(sample_id, roster[i]);
    if (!row)
      throw_mismatch("missing score for sample \"" + std::string(sample_id) + "\" from model \"" +
                     m.model_id + "\"");
    ids.push_back(m.model_id);
    values.insert(values.end(), row->begin(), row->end());
  }
  return ScoreTensor(std::string(sample_id), kind, std::move(ids), width, std::move(values));
}

std::vector<std::string> coverage_violations(const DatasetManifest& manifest, const ScoreSet& scores,
                                             std::span<const std::size_t> roster) {
  std::vector<std::string> out;
  for (const auto& r : manifest.records) {
    for (std::size_t m : roster) {
      if (!scores.find(r.sample_id, m))
        out.push_back("missing score for sample \"" + r.sample_id + "\" from model \"" +
                      scores.roster().at(m).model_id + "\"");
    }
  }
  return out;
}

}  // namespace ensdet
