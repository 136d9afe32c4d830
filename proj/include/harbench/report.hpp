#pragma once

#include <string>

#include "harbench/experiment.hpp"

namespace harbench {

enum class ReportFormat { json, csv, markdown };

ReportFormat report_format_from_string(const std::string& s);

/// Renders a result table. JSON and CSV round-trip values at full precision;
/// markdown renders per-combination accuracy tables with method rows, dataset
/// columns, a trailing mean column and '-' for infeasible cells.
std::string emit_report(const ResultTable& table, ReportFormat format);

ResultTable table_from_json(const std::string& text);
ResultTable table_from_csv(const std::string& text);

/// Per-fold accuracy series, one row per (method, dataset, combination, fold).
std::string per_fold_csv(const ResultTable& table);

/// Plot-ready point cloud: one row per sample with its projected coordinates
/// and class label.
std::string lda_points_csv(const Matrix& projected, const std::vector<std::string>& labels);

}  // namespace harbench
