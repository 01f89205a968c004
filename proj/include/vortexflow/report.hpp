#pragma once

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vortexflow/convergence.hpp"

namespace vflow {

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Canonical CSV: columns `h,error_l2,std_error,n_samples` and one trailing
// comment `# fitted_order=<v> ci=<lo>,<hi>`.
inline void write_report_csv(const ConvergenceReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_report_csv: cannot open " + path);
    out << "h,error_l2,std_error,n_samples\n";
    for (const ConvergenceRow& r : report.rows)
        out << format_g17(r.h) << ',' << format_g17(r.error_l2) << ',' << format_g17(r.std_error) << ','
            << r.n_samples << '\n';
    out << "# fitted_order=" << format_g17(report.fitted_order) << " ci=" << format_g17(report.ci_lo)
        << ',' << format_g17(report.ci_hi) << '\n';
    if (!out) throw IoError("write_report_csv: write failed for " + path);
}

inline void write_report_json(const ConvergenceReport& report, const std::string& path) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const ConvergenceRow& r : report.rows)
        j["rows"].push_back({{"h", r.h},
                             {"error_l2", r.error_l2},
                             {"std_error", r.std_error},
                             {"n_samples", r.n_samples}});
    j["fitted_order"] = report.fitted_order;
    j["ci"] = {report.ci_lo, report.ci_hi};
    j["pass"] = report.pass;
    j["saturated"] = report.saturated;
    std::ofstream out(path);
    if (!out) throw IoError("write_report_json: cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write_report_json: write failed for " + path);
}

inline void write_report(const ConvergenceReport& report, const std::string& path, const std::string& format) {
    if (format == "csv")
        write_report_csv(report, path);
    else if (format == "json")
        write_report_json(report, path);
    else
        throw ConfigError("write_report: unknown format '" + format + "'");
}

// Lossless partner of write_report_csv, used by the round-trip checks.
inline ConvergenceReport read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_report_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "h,error_l2,std_error,n_samples")
        throw IoError("read_report_csv: bad header in " + path);
    ConvergenceReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("#", 0) == 0) {
            std::istringstream meta(line);
            std::string hash, pair;
            meta >> hash >> pair;
            if (pair.rfind("fitted_order=", 0) == 0) report.fitted_order = std::stod(pair.substr(13));
            meta >> pair;
            if (pair.rfind("ci=", 0) == 0) {
                const std::string rest = pair.substr(3);
                const auto comma = rest.find(',');
                report.ci_lo = std::stod(rest.substr(0, comma));
                report.ci_hi = std::stod(rest.substr(comma + 1));
            }
            continue;
        }
        ConvergenceRow row;
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        row.h = std::stod(cell);
        std::getline(cells, cell, ',');
        row.error_l2 = std::stod(cell);
        std::getline(cells, cell, ',');
        row.std_error = std::stod(cell);
        std::getline(cells, cell, ',');
        row.n_samples = static_cast<std::size_t>(std::stoull(cell));
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace vflow
