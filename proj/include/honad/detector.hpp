#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "honad/distances.hpp"
#include "honad/hon_graph.hpp"

namespace honad {

enum class Representation { fon, hon };
std::string representation_name(Representation repr);
Representation parse_representation(const std::string& name);

/// d_t for t = 2..T; entries where the metric is undefined are kept as
/// skipped markers with the reason, never silently dropped.
struct DistanceSeries {
    struct Entry {
        int t = 0;
        std::optional<double> d;
        std::string skip_reason; // non-empty iff !d
    };
    std::vector<Entry> values;
    MetricKind metric = MetricKind::weight;
    Representation representation = Representation::hon;
};

enum class DetectorMode { fixed, running };

struct DetectorConfig {
    DetectorMode mode = DetectorMode::running;
    double fixed_threshold = 0.0; // Delta, fixed mode only
    int window_k = 10;            // running-statistics window
    double sigma_multiplier = 2.0;
    double sigma_floor = 1e-12;
};

struct AnomalyReport {
    struct Row {
        int t = 0;
        std::optional<double> d; // empty for skipped entries
        std::string skip_reason;
        std::optional<double> mean, std_dev, z; // running mode, once measurable
        bool flagged = false;
    };
    std::vector<Row> rows;
    std::vector<int> flagged_windows;
};

/// Computes D(G_{t-1}, G_t) for every consecutive pair. Undefined-distance
/// and convergence errors become skipped entries.
DistanceSeries distance_series(const std::vector<HonGraph>& graphs, MetricKind metric,
                               Representation representation,
                               const SpectralParams& params = {});

/// Fixed mode flags d_t > Delta. Running mode compares d_t against the mean
/// and population standard deviation of the previous min(window_k, available)
/// usable entries (d_t itself excluded); flags z > sigma_multiplier with
/// sigma floored. Entries with fewer than two usable predecessors only seed
/// the statistics and are never flagged. Skipped entries neither update
/// statistics nor get flagged.
AnomalyReport detect(const DistanceSeries& series, const DetectorConfig& config);

/// CSV with header `t,d,mean,std,z,flagged,reason`; one row per t.
void save_report_csv(const AnomalyReport& report, std::ostream& out);
/// JSON mirror of the CSV schema.
void save_report_json(const AnomalyReport& report, std::ostream& out);

/// Intermediate series format: header `t,d,reason`.
void save_series_csv(const DistanceSeries& series, std::ostream& out);
DistanceSeries load_series_csv(std::istream& in, const std::string& source_name);

} // namespace honad
