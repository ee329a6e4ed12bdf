#include "ensdet/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "ensdet/score_io.hpp"

namespace ensdet {

std::string render_report(const EvaluationResult& r) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["format"] = "ensdet-report";
  doc["format_version"] = kReportFormatVersion;
  doc["dataset"] = r.dataset;
  doc["task"] = to_string(r.task);
  doc["level"] = to_string(r.level);
  doc["design"] = to_string(r.design);
  doc["threshold"] = uses_threshold(r.design) ? json(r.threshold) : json(nullptr);
  doc["mode"] = to_string(r.mode);
  doc["models"] = r.models;
  doc["classes"] = r.class_names;
  doc["sample_count"] = r.metrics.sample_count;
  doc["balanced_accuracy"] = r.metrics.balanced_accuracy;
  json recalls = json::array();
  for (const auto& rec : r.metrics.per_class_recall) recalls.push_back(rec ? json(*rec) : json(nullptr));
  doc["per_class_recall"] = std::move(recalls);
  doc["excluded_classes"] = r.metrics.excluded_classes;
  json cm = json::array();
  for (std::size_t t = 0; t < r.confusion.classes(); ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) row.push_back(r.confusion.at(t, p));
    cm.push_back(std::move(row));
  }
  doc["confusion_matrix"] = std::move(cm);
  return doc.dump(2) + "\n";
}

std::string render_report_table(const EvaluationResult& r) {
  std::ostringstream out;
  char buf[128];
  out << r.dataset << "  " << to_string(r.task) << " / " << to_string(r.level) << " level / "
      << to_string(r.design);
  if (uses_threshold(r.design)) {
    std::snprintf(buf, sizeof buf, " (t = %.2f)", r.threshold);
    out << buf;
  }
  out << '\n';
  std::snprintf(buf, sizeof buf, "balanced accuracy  %.2f%%  over %llu samples\n",
                100.0 * r.metrics.balanced_accuracy, static_cast<unsigned long long>(r.metrics.sample_count));
  out << buf;
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    const auto& rec = r.metrics.per_class_recall[c];
    if (rec) {
      std::snprintf(buf, sizeof buf, "  %-20s recall %7.2f%%  (n = %llu)\n", r.class_names[c].c_str(), 100.0 * *rec,
                    static_cast<unsigned long long>(r.confusion.row_total(c)));
    } else {
      std::snprintf(buf, sizeof buf, "  %-20s excluded (no samples)\n", r.class_names[c].c_str());
    }
    out << buf;
  }
  return out.str();
}

std::string render_sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "# ensdet-sweep " << kReportFormatVersion << " design=" << to_string(r.design)
      << " task=" << to_string(r.task) << " best_threshold=" << format_score(r.best_threshold)
      << " best_balanced_accuracy=" << format_score(r.best_balanced_accuracy) << '\n';
  out << "threshold,ba_detection,ba_attribution\n";
  for (const auto& p : r.points) {
    out << format_score(p.threshold) << ',' << format_score(p.detection.metrics.balanced_accuracy) << ',';
    if (p.attribution) out << format_score(p.attribution->metrics.balanced_accuracy);
    out << '\n';
  }
  return out.str();
}

std::string render_verdicts(std::span<const VideoVerdict> verdicts) {
  std::ostringstream out;
  out << "#format\tensdet-verdicts\t" << kVerdictFormatVersion << '\n';
  out << "#columns\tvideo_id\tvideo_fake_score\tvideo_z_hat\tcontributing_faces\tidentity_scores\n";
  for (const auto& v : verdicts) {
    out << v.video_id << '\t' << format_score(v.video_fake_score) << '\t' << as_int(v.video_z_hat) << '\t'
        << v.contributing_faces << '\t';
    bool first = true;
    for (const auto& [id, s] : v.per_identity_scores) {
      if (!first) out << ';';
      out << id << '=' << format_score(s);
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace ensdet
