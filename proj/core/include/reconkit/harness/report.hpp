#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace reconkit::harness {

struct ReportRow {
    std::string block;  // consecutive rows sharing a block render under one heading
    std::string label;
    std::vector<std::optional<double>> values;  // aligned to columns; nullopt renders "-"
    std::string note;
    int decimals = 2;
};

struct ExperimentReport {
    std::string experiment;
    nlohmann::json config = nlohmann::json::object();
    std::string row_header = "Metric";
    std::vector<std::string> columns;
    std::vector<ReportRow> rows;
    nlohmann::json instances = nlohmann::json::array();
    nlohmann::json extra = nlohmann::json::object();

    const ReportRow* row(const std::string& label) const;
    std::optional<double> cell(const std::string& label, const std::string& column) const;

    nlohmann::json to_json() const;
    std::string to_markdown() const;
};

/// Fixed decimals (two by default), or "-" for a missing value.
std::string format_cell(std::optional<double> value, int decimals = 2);

enum class ReportFormat { Json, Markdown };

/// Writes report.json and/or report.md under dir.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                 const std::vector<ReportFormat>& formats = {ReportFormat::Json, ReportFormat::Markdown});

}  // namespace reconkit::harness
