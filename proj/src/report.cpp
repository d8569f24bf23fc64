#include "dsuc/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace dsuc {

namespace fs = std::filesystem;

void Table::add(std::vector<Cell> row)
{
    if (row.size() != columns.size()) throw std::logic_error("row width differs from table '" + name + "'");
    rows.push_back(std::move(row));
}

Table& ExperimentReport::table(const std::string& name, std::vector<std::string> columns)
{
    for (auto& t : tables)
        if (t.name == name) return t;
    tables.push_back({name, std::move(columns), {}});
    return tables.back();
}

const Table* ExperimentReport::find_table(const std::string& name) const
{
    for (const auto& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

const FittedConstant* ExperimentReport::find_constant(const std::string& name) const
{
    for (const auto& c : constants)
        if (c.name == name) return &c;
    return nullptr;
}

bool ExperimentReport::checks_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

nlohmann::json cell_json(const Cell& c)
{
    if (const double* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return format_double(*d);
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

nlohmann::json finite_or_string(double v)
{
    if (std::isfinite(v)) return v;
    return format_double(v);
}

} // namespace

nlohmann::json report_json(const ExperimentReport& r)
{
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["experiment"] = r.experiment;
    j["config"] = r.config;
    j["config_hash"] = config_hash(r.config);
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& t : r.tables) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json jr = nlohmann::json::array();
            for (const auto& c : row) jr.push_back(cell_json(c));
            rows.push_back(jr);
        }
        tables[t.name] = {{"columns", t.columns}, {"rows", rows}};
    }
    j["tables"] = tables;
    nlohmann::json consts = nlohmann::json::array();
    for (const auto& c : r.constants) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["value"] = finite_or_string(c.value);
        jc["r_squared"] = c.r_squared ? finite_or_string(*c.r_squared) : nlohmann::json(nullptr);
        jc["residual"] = finite_or_string(c.residual);
        jc["samples"] = c.samples;
        consts.push_back(jc);
    }
    j["constants"] = consts;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    j["warnings"] = r.warnings;
    j["summary"] = r.summary;
    return j;
}

std::string table_csv(const Table& t)
{
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (const double* d = std::get_if<double>(&row[i])) out += format_double(*d);
            else if (const auto* n = std::get_if<std::int64_t>(&row[i])) out += std::to_string(*n);
            else out += csv_field(std::get<std::string>(row[i]));
        }
        out += '\n';
    }
    return out;
}

std::uint64_t config_hash(const nlohmann::json& config)
{
    const std::string s = config.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

WrittenFiles write_report(const ExperimentReport& r, const fs::path& dir)
{
    fs::create_directories(dir);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash(r.config)));
    const std::string stem = r.experiment + "-" + hex;
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        os << text;
    };
    WrittenFiles files;
    files.json = dir / (stem + ".json");
    write(files.json, report_json(r).dump(2) + "\n");
    for (const auto& t : r.tables) {
        files.csv.push_back(dir / (stem + "." + t.name + ".csv"));
        write(files.csv.back(), table_csv(t));
    }
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    files.meta = dir / (stem + ".meta.json");
    write(files.meta, nlohmann::json{{"created_utc", stamp}, {"report", files.json.filename().string()}}.dump(2) + "\n");
    return files;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("line fit needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("line fit needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss += e * e;
    }
    f.r_squared = syy > 0.0 ? 1.0 - ss / syy : 1.0;
    f.rms_residual = std::sqrt(ss / n);
    f.n = n;
    return f;
}

double median(std::vector<double> v)
{
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace dsuc
