#include "honad/detector.hpp"

#include <cmath>
#include <deque>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "honad/errors.hpp"
#include "honad/util.hpp"

namespace honad {

std::string representation_name(Representation repr) {
    return repr == Representation::fon ? "fon" : "hon";
}

Representation parse_representation(const std::string& name) {
    if (name == "fon" || name == "FON") return Representation::fon;
    if (name == "hon" || name == "HON") return Representation::hon;
    throw ArgumentError("unknown representation '" + name + "' (expected fon|hon)");
}

DistanceSeries distance_series(const std::vector<HonGraph>& graphs, MetricKind metric,
                               Representation representation,
                               const SpectralParams& params) {
    if (graphs.size() < 2)
        throw ArgumentError("distance_series: need at least 2 graphs");
    DistanceSeries series;
    series.metric = metric;
    series.representation = representation;
    series.values.reserve(graphs.size() - 1);
    for (std::size_t i = 1; i < graphs.size(); ++i) {
        DistanceSeries::Entry entry;
        entry.t = static_cast<int>(i) + 1; // windows are 1-based; d_t pairs t-1 with t
        try {
            entry.d = compute_distance(metric, graphs[i - 1], graphs[i], params);
        } catch (const UndefinedDistanceError& e) {
            entry.skip_reason = e.what();
        } catch (const ConvergenceError& e) {
            entry.skip_reason = e.what();
        }
        series.values.push_back(std::move(entry));
    }
    return series;
}

AnomalyReport detect(const DistanceSeries& series, const DetectorConfig& config) {
    std::size_t usable = 0;
    for (const auto& entry : series.values)
        if (entry.d) ++usable;

    if (config.mode == DetectorMode::running) {
        if (config.window_k < 2)
            throw ArgumentError("detect: window_k must be >= 2 in running mode");
        if (usable < static_cast<std::size_t>(config.window_k) + 1)
            throw ArgumentError("detect: running mode needs at least window_k+1 usable "
                                "entries, have " + std::to_string(usable));
    } else if (usable == 0) {
        throw ArgumentError("detect: no usable entries");
    }

    AnomalyReport report;
    std::deque<double> history;
    for (const auto& entry : series.values) {
        AnomalyReport::Row row;
        row.t = entry.t;
        row.d = entry.d;
        row.skip_reason = entry.skip_reason;
        if (entry.d) {
            const double d = *entry.d;
            if (config.mode == DetectorMode::fixed) {
                row.flagged = d > config.fixed_threshold;
            } else if (!history.empty()) {
                double mean = 0;
                for (double v : history) mean += v;
                mean /= static_cast<double>(history.size());
                double var = 0;
                for (double v : history) var += (v - mean) * (v - mean);
                var /= static_cast<double>(history.size());
                const double sigma = std::sqrt(var);
                const double z = (d - mean) / std::max(sigma, config.sigma_floor);
                row.mean = mean;
                row.std_dev = sigma;
                row.z = z;
                // A single predecessor gives no scale for sigma; flagging
                // starts once two usable values precede the entry.
                row.flagged = history.size() >= 2 && z > config.sigma_multiplier;
            }
            history.push_back(d);
            if (history.size() > static_cast<std::size_t>(config.window_k))
                history.pop_front();
        }
        if (row.flagged) report.flagged_windows.push_back(row.t);
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

} // namespace

void save_report_csv(const AnomalyReport& report, std::ostream& out) {
    out << "t,d,mean,std,z,flagged,reason\n";
    for (const auto& row : report.rows) {
        out << row.t << ',' << opt_str(row.d) << ',' << opt_str(row.mean) << ','
            << opt_str(row.std_dev) << ',' << opt_str(row.z) << ','
            << (row.flagged ? "true" : "false") << ',';
        // Reasons never contain commas today, but quote defensively anyway.
        if (row.skip_reason.find(',') != std::string::npos)
            out << '"' << row.skip_reason << '"';
        else
            out << row.skip_reason;
        out << '\n';
    }
}

void save_report_json(const AnomalyReport& report, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json r;
        r["t"] = row.t;
        r["d"] = row.d ? nlohmann::ordered_json(*row.d) : nlohmann::ordered_json();
        r["mean"] = row.mean ? nlohmann::ordered_json(*row.mean) : nlohmann::ordered_json();
        r["std"] = row.std_dev ? nlohmann::ordered_json(*row.std_dev)
                               : nlohmann::ordered_json();
        r["z"] = row.z ? nlohmann::ordered_json(*row.z) : nlohmann::ordered_json();
        r["flagged"] = row.flagged;
        r["reason"] = row.skip_reason;
        doc["rows"].push_back(std::move(r));
    }
    doc["flagged_windows"] = report.flagged_windows;
    out << doc.dump(2) << '\n';
}

void save_series_csv(const DistanceSeries& series, std::ostream& out) {
    out << "t,d,reason\n";
    for (const auto& entry : series.values) {
        out << entry.t << ',' << opt_str(entry.d) << ',';
        if (entry.skip_reason.find(',') != std::string::npos)
            out << '"' << entry.skip_reason << '"';
        else
            out << entry.skip_reason;
        out << '\n';
    }
}

DistanceSeries load_series_csv(std::istream& in, const std::string& source_name) {
    DistanceSeries series;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("t,", 0) == 0) continue; // header
        auto where = source_name + ":" + std::to_string(line_no);
        std::size_t c1 = line.find(',');
        if (c1 == std::string::npos)
            throw ParseError(where + ": expected `t,d,reason`");
        std::size_t c2 = line.find(',', c1 + 1);
        DistanceSeries::Entry entry;
        entry.t = static_cast<int>(parse_u64(
            std::string_view(line).substr(0, c1), where + ": t"));
        std::string_view dstr = std::string_view(line).substr(
            c1 + 1, c2 == std::string::npos ? c2 : c2 - c1 - 1);
        if (!dstr.empty()) entry.d = parse_double(dstr, where + ": d");
        if (c2 != std::string::npos) {
            std::string reason = line.substr(c2 + 1);
            if (reason.size() >= 2 && reason.front() == '"' && reason.back() == '"')
                reason = reason.substr(1, reason.size() - 2);
            entry.skip_reason = reason;
        }
        if (!entry.d && entry.skip_reason.empty())
            entry.skip_reason = "skipped";
        series.values.push_back(std::move(entry));
    }
    return series;
}

} // namespace honad
