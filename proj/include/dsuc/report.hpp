#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include "json.hpp"
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dsuc {

inline constexpr const char* kReportSchema = "dsuc.report/1";

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

struct FittedConstant {
    std::string name;
    double value;
    std::optional<double> r_squared; // regressions only
    double residual = 0.0;           // rms residual of the fit, 0 for extremal statistics
    std::size_t samples = 0;
};

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    nlohmann::json config = nlohmann::json::object();
    std::deque<Table> tables; // references returned by table() stay valid
    std::vector<FittedConstant> constants;
    std::vector<CheckResult> checks;
    std::vector<std::string> warnings;
    nlohmann::json summary = nlohmann::json::object();

    Table& table(const std::string& name, std::vector<std::string> columns);
    const Table* find_table(const std::string& name) const;
    const FittedConstant* find_constant(const std::string& name) const;
    bool checks_passed() const;
};

nlohmann::json report_json(const ExperimentReport& r);
std::string table_csv(const Table& t);
std::string format_double(double v);

// FNV-1a 64 over the compact dump of the config.
std::uint64_t config_hash(const nlohmann::json& config);

struct WrittenFiles {
    std::filesystem::path json;
    std::vector<std::filesystem::path> csv;
    std::filesystem::path meta;
};
// <dir>/<experiment>-<hash>.json, one .csv per table, and a .meta.json sidecar
// holding the only non-deterministic fields (timestamp).
WrittenFiles write_report(const ExperimentReport& r, const std::filesystem::path& dir);

struct LineFit {
    double slope, intercept, r_squared, rms_residual;
    std::size_t n;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> v);

} // namespace dsuc
