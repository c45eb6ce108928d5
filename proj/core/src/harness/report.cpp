#include "reconkit/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "reconkit/error.hpp"

namespace reconkit::harness {

using nlohmann::json;

const ReportRow* ExperimentReport::row(const std::string& label) const {
    for (const auto& r : rows)
        if (r.label == label) return &r;
    return nullptr;
}

std::optional<double> ExperimentReport::cell(const std::string& label, const std::string& column) const {
    const ReportRow* r = row(label);
    auto it = std::find(columns.begin(), columns.end(), column);
    if (!r || it == columns.end()) return std::nullopt;
    return r->values.at(static_cast<std::size_t>(it - columns.begin()));
}

json ExperimentReport::to_json() const {
    json rs = json::array();
    for (const auto& r : rows) {
        json values = json::array();
        for (const auto& v : r.values) values.push_back(v ? json(*v) : json(nullptr));
        json item = {{"block", r.block}, {"label", r.label}, {"values", values}};
        if (!r.note.empty()) item["note"] = r.note;
        if (r.decimals != 2) item["decimals"] = r.decimals;
        rs.push_back(std::move(item));
    }
    return {{"experiment", experiment}, {"config", config},       {"row_header", row_header}, {"columns", columns},
            {"rows", rs},               {"instances", instances}, {"extra", extra}};
}

std::string format_cell(std::optional<double> value, int decimals) {
    if (!value || !std::isfinite(*value)) return "-";
    std::string s = fmt::format("{:.{}f}", *value, decimals);
    // Avoid "-0.00".
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string ExperimentReport::to_markdown() const {
    std::vector<std::vector<std::string>> table;
    table.push_back({row_header});
    for (const auto& c : columns) table.back().push_back(c);
    std::string block;
    for (const auto& r : rows) {
        if (!r.block.empty() && r.block != block) {
            std::vector<std::string> line(columns.size() + 1);
            line[0] = "*" + r.block + "*";
            table.push_back(std::move(line));
        }
        block = r.block;
        std::vector<std::string> line{r.label};
        for (const auto& v : r.values) line.push_back(format_cell(v, r.decimals));
        line.resize(columns.size() + 1);
        table.push_back(std::move(line));
    }

    std::vector<std::size_t> width(columns.size() + 1, 3);
    for (const auto& line : table)
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());

    std::string out = "## " + experiment + "\n\n";
    auto emit = [&](const std::vector<std::string>& line) {
        out += "|";
        for (std::size_t i = 0; i < line.size(); ++i)
            out += i == 0 ? fmt::format(" {:<{}} |", line[i], width[i]) : fmt::format(" {:>{}} |", line[i], width[i]);
        out += "\n";
    };
    emit(table[0]);
    out += "|";
    for (std::size_t i = 0; i < width.size(); ++i)
        out += i == 0 ? " " + std::string(width[i], '-') + " |" : " " + std::string(width[i] - 1, '-') + ": |";
    out += "\n";
    for (std::size_t i = 1; i < table.size(); ++i) emit(table[i]);

    bool any_note = false;
    for (const auto& r : rows) {
        if (r.note.empty()) continue;
        if (!any_note) out += "\n";
        any_note = true;
        out += "- " + r.label + ": " + r.note + "\n";
    }
    return out;
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                 const std::vector<ReportFormat>& formats) {
    std::filesystem::create_directories(dir);
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw Error("io", "cannot write " + path.string());
    };
    for (auto f : formats) {
        if (f == ReportFormat::Json) write(dir / "report.json", report.to_json().dump(2) + "\n");
        if (f == ReportFormat::Markdown) write(dir / "report.md", report.to_markdown());
    }
}

}  // namespace reconkit::harness
