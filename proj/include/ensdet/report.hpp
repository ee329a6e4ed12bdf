#pragma once

// Report serialization: evaluation reports (JSON), sweep tables (CSV) and
// per-video verdict files (tab-separated). All renderings are deterministic and
// carry a format-version field.

#include <span>
#include <string>

#include "ensdet/aggregation.hpp"
#include "ensdet/evaluation.hpp"
#include "ensdet/threshold_search.hpp"

namespace ensdet {

inline constexpr int kReportFormatVersion = 1;
inline constexpr int kVerdictFormatVersion = 1;

std::string render_report(const EvaluationResult& result);
std::string render_report_table(const EvaluationResult& result);

// Columns: threshold, ba_detection, ba_attribution (blank when unavailable).
std::string render_sweep_csv(const SweepResult& result);

std::string render_verdicts(std::span<const VideoVerdict> verdicts);

}  // namespace ensdet
