#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "uqsurro/data.hpp"
#include "uqsurro/errors.hpp"
#include "uqsurro/json_io.hpp"
#include "uqsurro/predictive.hpp"

namespace uqsurro {

// One test-case prediction in a UQ report.
struct UqRow {
    std::size_t case_id = 0;
    std::string response;
    std::string method;
    double mean = 0.0;
    double std_dev = 0.0;
    double ci68_lo = 0.0, ci68_hi = 0.0;
    double ci95_lo = 0.0, ci95_hi = 0.0;
    double reference = 0.0;
};

struct UqSummary {
    std::size_t n = 0;
    double rmse = 0.0;
    double mean_std = 0.0;
    double coverage68 = 0.0;
    double coverage95 = 0.0;
};

inline UqRow make_uq_row(std::size_t case_id, const std::string& response,
                         const std::string& method, double mean, double variance,
                         double reference) {
    UqRow row;
    row.case_id = case_id;
    row.response = response;
    row.method = method;
    row.mean = mean;
    row.std_dev = std::sqrt(variance);
    row.ci68_lo = mean - z_for_level(0.6827) * row.std_dev;
    row.ci68_hi = mean + z_for_level(0.6827) * row.std_dev;
    row.ci95_lo = mean - z_for_level(0.95) * row.std_dev;
    row.ci95_hi = mean + z_for_level(0.95) * row.std_dev;
    row.reference = reference;
    return row;
}

inline UqSummary summarize_rows(const std::vector<const UqRow*>& rows) {
    if (rows.empty()) throw DataError("summarize_rows: no rows");
    UqSummary s;
    s.n = rows.size();
    double sq = 0.0, std_acc = 0.0;
    std::size_t in68 = 0, in95 = 0;
    for (const UqRow* r : rows) {
        const double err = r->mean - r->reference;
        sq += err * err;
        std_acc += r->std_dev;
        in68 += (r->reference >= r->ci68_lo && r->reference <= r->ci68_hi);
        in95 += (r->reference >= r->ci95_lo && r->reference <= r->ci95_hi);
    }
    s.rmse = std::sqrt(sq / static_cast<double>(s.n));
    s.mean_std = std_acc / static_cast<double>(s.n);
    s.coverage68 = static_cast<double>(in68) / static_cast<double>(s.n);
    s.coverage95 = static_cast<double>(in95) / static_cast<double>(s.n);
    return s;
}

inline const char* uq_report_header() {
    return "case_id,response,method,mean,std,ci68_lo,ci68_hi,ci95_lo,ci95_hi,reference";
}

inline void write_uq_rows(const std::filesystem::path& path, const std::vector<UqRow>& rows) {
    std::string out(uq_report_header());
    out += '\n';
    for (const UqRow& r : rows) {
        out += std::to_string(r.case_id) + ',' + r.response + ',' + r.method + ',' +
               format_double(r.mean) + ',' + format_double(r.std_dev) + ',' +
               format_double(r.ci68_lo) + ',' + format_double(r.ci68_hi) + ',' +
               format_double(r.ci95_lo) + ',' + format_double(r.ci95_hi) + ',' +
               format_double(r.reference) + '\n';
    }
    atomic_write_file(path, out);
}

inline std::vector<UqRow> read_uq_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != uq_report_header())
        throw DataError("'" + path.string() + "': not a UQ report file");
    std::vector<UqRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 10)
            throw DataError("'" + path.string() + "': malformed report row");
        UqRow r;
        r.case_id = std::stoull(cells[0]);
        r.response = cells[1];
        r.method = cells[2];
        r.mean = std::stod(cells[3]);
        r.std_dev = std::stod(cells[4]);
        r.ci68_lo = std::stod(cells[5]);
        r.ci68_hi = std::stod(cells[6]);
        r.ci95_lo = std::stod(cells[7]);
        r.ci95_hi = std::stod(cells[8]);
        r.reference = std::stod(cells[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// Per-response summaries keyed by (method, response), plus a "(all)" pool
// per method.
inline json summaries_to_json(const std::vector<UqRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::vector<const UqRow*>> groups;
    std::map<std::string, std::vector<const UqRow*>> pooled;
    for (const UqRow& r : rows) {
        groups[{r.method, r.response}].push_back(&r);
        pooled[r.method].push_back(&r);
    }
    json out = json::object();
    for (const auto& [key, group] : groups) {
        const UqSummary s = summarize_rows(group);
        out[key.first][key.second] = {{"n", s.n},
                                      {"rmse", s.rmse},
                                      {"mean_std", s.mean_std},
                                      {"coverage68", s.coverage68},
                                      {"coverage95", s.coverage95}};
    }
    for (const auto& [method, group] : pooled) {
        const UqSummary s = summarize_rows(group);
        out[method]["(all)"] = {{"n", s.n},
                                {"rmse", s.rmse},
                                {"mean_std", s.mean_std},
                                {"coverage68", s.coverage68},
                                {"coverage95", s.coverage95}};
    }
    return out;
}

} // namespace uqsurro
