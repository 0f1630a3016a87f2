#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "honad/corpus.hpp"
#include "honad/detector.hpp"
#include "honad/distances.hpp"
#include "honad/rule_miner.hpp"
#include "honad/synthgen.hpp"

namespace honad {

struct GenerateOptions {
    ScenarioConfig scenario;
    std::filesystem::path corpus_out;
    std::filesystem::path truth_out;
};

struct GenerateSummary {
    GroundTruth truth;
    std::uint64_t windows = 0;
    std::uint64_t trajectories = 0;
    std::uint64_t clicks = 0; // L
    int distinct_pages = 0;   // N
};

GenerateSummary run_generate(const GenerateOptions& options);

struct PipelineOptions {
    std::filesystem::path corpus_path;
    std::filesystem::path out_dir;
    Representation representation = Representation::hon;
    std::vector<MetricKind> metrics = all_metrics();
    std::uint32_t min_support = 1;
    bool dedupe = false;
    DetectorConfig detector;
    SpectralParams spectral;
    std::optional<std::filesystem::path> truth_path;
    bool slack = false; // count a boundary as detected when flagged within +-1 window
    int jobs = 1;
};

struct BoundaryEvaluation {
    int window = 0;
    std::string anomaly_class;
    std::optional<double> d, z;
    bool flagged = false;
    bool detected = false;
};

struct MetricEvaluation {
    std::vector<BoundaryEvaluation> boundaries;
    double precision = 0; // flagged windows matching a boundary / flagged windows
    double recall = 0;    // boundaries detected / boundaries
    std::vector<int> flagged_windows;
};

struct MetricOutput {
    MetricKind metric = MetricKind::weight;
    DistanceSeries series;
    AnomalyReport report;
    std::optional<MetricEvaluation> evaluation;
};

struct PipelineResult {
    int windows = 0;
    MinerStats mining_total;  // summed over windows
    int max_order_found = 0;  // across windows
    std::vector<MetricOutput> metrics;
};

/// Mines every window (FON: first-order baseline; HON: BuildHON+), builds
/// and serializes the per-window graphs, then runs every requested metric
/// through the detector. Artifacts land in out_dir:
///   graphs/window_<t>.txt, distances_<m>.csv, report_<m>.csv,
///   report_<m>.json, evaluation_<m>.json (with ground truth).
/// Byte-identical output for identical options, for any jobs value.
PipelineResult run_pipeline(const PipelineOptions& options);

MetricEvaluation evaluate_against_truth(const AnomalyReport& report,
                                        const GroundTruth& truth, bool slack);

struct BenchOptions {
    std::filesystem::path corpus_path;
    bool dedupe = false;
    std::uint32_t min_support = 1;
    std::vector<int> baseline_max_orders;
    std::optional<int> window; // restrict to one window index; absent = all
    std::optional<std::filesystem::path> csv_out;
};

struct BenchRow {
    std::string algorithm; // "plus" | "baseline"
    std::optional<int> max_order;
    double wall_ms = 0;
    std::uint64_t observations_materialized = 0;
    std::uint64_t peak_table_entries = 0; // max over windows
    long peak_rss_kb = -1;                // best effort, -1 when unavailable
    int max_order_found = 0;
    std::size_t rules_total = 0;
    std::string rule_histogram; // "1:52;2:3"
};

struct BenchResult {
    std::vector<BenchRow> rows;
    bool equivalence_ok = true;
    std::string mismatch_note;
};

/// Runs BuildHON+ once and BuildHON at each requested max_order on the same
/// windows; asserts rule-set equality whenever a baseline order covers the
/// plus variant's max order found.
BenchResult run_bench(const BenchOptions& options);

void save_bench_csv(const BenchResult& result, std::ostream& out);

} // namespace honad
