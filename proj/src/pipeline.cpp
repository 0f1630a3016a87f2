#include "honad/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "honad/errors.hpp"
#include "honad/hon_graph.hpp"
#include "honad/util.hpp"

namespace honad {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + path.string());
}

/// Runs fn(i) for i in [0, n) on `jobs` threads; first exception rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int count = static_cast<int>(std::min<std::size_t>(n, jobs));
    threads.reserve(count);
    for (int i = 0; i < count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

long read_peak_rss_kb() {
    std::ifstream status("/proc/self/status");
    std::string line;
    long current = -1;
    while (std::getline(status, line)) {
        auto fields = split_whitespace(line);
        if (fields.size() < 2) continue;
        if (fields[0] == "VmHWM:") return static_cast<long>(parse_u64(fields[1], "VmHWM"));
        if (fields[0] == "VmRSS:") current = static_cast<long>(parse_u64(fields[1], "VmRSS"));
    }
    return current; // kernels without VmHWM: current resident size instead
}

// Linux can reset the resident high-water mark; harmless no-op elsewhere.
void try_reset_peak_rss() {
    std::ofstream clear("/proc/self/clear_refs");
    if (clear) clear << "5";
}

} // namespace

GenerateSummary run_generate(const GenerateOptions& options) {
    GenerateSummary summary;
    summary.truth = generate(options.scenario, options.corpus_out);

    std::ostringstream truth_text;
    save_ground_truth(summary.truth, truth_text);
    write_file(options.truth_out, truth_text.str());

    const auto& s = options.scenario;
    summary.windows = static_cast<std::uint64_t>(regime_table().size()) *
                      static_cast<std::uint64_t>(s.windows_per_regime);
    summary.trajectories = summary.windows * static_cast<std::uint64_t>(s.n_users);
    summary.clicks =
        summary.trajectories * static_cast<std::uint64_t>(s.steps_per_user + 1);
    summary.distinct_pages = s.grid.pages();
    return summary;
}

MetricEvaluation evaluate_against_truth(const AnomalyReport& report,
                                        const GroundTruth& truth, bool slack) {
    MetricEvaluation eval;
    eval.flagged_windows = report.flagged_windows;
    const int tolerance = slack ? 1 : 0;
    auto matches = [&](int flagged, int boundary) {
        return std::abs(flagged - boundary) <= tolerance;
    };
    for (const auto& b : truth.boundaries) {
        BoundaryEvaluation be;
        be.window = b.window;
        be.anomaly_class = b.anomaly_class;
        for (const auto& row : report.rows)
            if (row.t == b.window) {
                be.d = row.d;
                be.z = row.z;
                be.flagged = row.flagged;
                break;
            }
        for (int f : report.flagged_windows)
            if (matches(f, b.window)) be.detected = true;
        eval.boundaries.push_back(std::move(be));
    }
    std::size_t detected = 0;
    for (const auto& be : eval.boundaries)
        if (be.detected) ++detected;
    eval.recall = truth.boundaries.empty()
                      ? 0.0
                      : static_cast<double>(detected) /
                            static_cast<double>(truth.boundaries.size());
    std::size_t true_flags = 0;
    for (int f : report.flagged_windows)
        for (const auto& b : truth.boundaries)
            if (matches(f, b.window)) {
                ++true_flags;
                break;
            }
    eval.precision = report.flagged_windows.empty()
                         ? 0.0
                         : static_cast<double>(true_flags) /
                               static_cast<double>(report.flagged_windows.size());
    return eval;
}

namespace {

nlohmann::ordered_json evaluation_json(const MetricEvaluation& eval, MetricKind metric,
                                       Representation repr) {
    nlohmann::ordered_json doc;
    doc["metric"] = metric_cli_name(metric);
    doc["representation"] = representation_name(repr);
    doc["boundaries"] = nlohmann::ordered_json::array();
    for (const auto& b : eval.boundaries) {
        nlohmann::ordered_json j;
        j["window"] = b.window;
        j["class"] = b.anomaly_class;
        j["d"] = b.d ? nlohmann::ordered_json(*b.d) : nlohmann::ordered_json();
        j["z"] = b.z ? nlohmann::ordered_json(*b.z) : nlohmann::ordered_json();
        j["flagged"] = b.flagged;
        j["detected"] = b.detected;
        doc["boundaries"].push_back(std::move(j));
    }
    doc["precision"] = eval.precision;
    doc["recall"] = eval.recall;
    doc["flagged_windows"] = eval.flagged_windows;
    return doc;
}

} // namespace

PipelineResult run_pipeline(const PipelineOptions& options) {
    const Corpus corpus = load_corpus(options.corpus_path, options.dedupe);
    if (corpus.windows.size() < 2)
        throw ArgumentError("pipeline: need at least 2 windows, corpus has " +
                            std::to_string(corpus.windows.size()));

    std::filesystem::create_directories(options.out_dir / "graphs");

    const std::size_t n = corpus.windows.size();
    std::vector<HonGraph> graphs(n);
    std::vector<std::string> graph_text(n);
    std::vector<MinerStats> stats(n);
    std::vector<int> found(n, 0);

    parallel_for(n, options.jobs, [&](std::size_t i) {
        MinerConfig config;
        config.min_support = options.min_support;
        MineResult mined;
        if (options.representation == Representation::fon) {
            config.max_order = 1; // bigram-only rule set
            mined = mine_rules_baseline(corpus.windows[i], config);
        } else {
            mined = mine_rules_plus(corpus.windows[i], config);
        }
        stats[i] = mined.stats;
        found[i] = mined.rules.max_order_found();
        graphs[i] = build_graph(mined.rules, corpus.vocab);
        graph_text[i] = format_graph(graphs[i]);
    });

    PipelineResult result;
    result.windows = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.mining_total.observations_materialized +=
            stats[i].observations_materialized;
        result.mining_total.divergence_tests += stats[i].divergence_tests;
        result.mining_total.prunes_by_bound += stats[i].prunes_by_bound;
        result.mining_total.peak_table_entries =
            std::max(result.mining_total.peak_table_entries,
                     stats[i].peak_table_entries);
        result.mining_total.max_materialized_order =
            std::max(result.mining_total.max_materialized_order,
                     stats[i].max_materialized_order);
        result.max_order_found = std::max(result.max_order_found, found[i]);
        write_file(options.out_dir / "graphs" /
                       ("window_" + std::to_string(corpus.windows[i].index) + ".txt"),
                   graph_text[i]);
    }

    std::optional<GroundTruth> truth;
    if (options.truth_path) truth = load_ground_truth(*options.truth_path);

    std::vector<MetricOutput> outputs(options.metrics.size());
    parallel_for(options.metrics.size(), options.jobs, [&](std::size_t m) {
        MetricOutput& out = outputs[m];
        out.metric = options.metrics[m];
        out.series = distance_series(graphs, out.metric, options.representation,
                                     options.spectral);
        out.report = detect(out.series, options.detector);
        if (truth) out.evaluation = evaluate_against_truth(out.report, *truth,
                                                           options.slack);
    });

    for (auto& out : outputs) {
        const std::string name = metric_cli_name(out.metric);
        std::ostringstream series_csv, report_csv, report_json;
        save_series_csv(out.series, series_csv);
        save_report_csv(out.report, report_csv);
        save_report_json(out.report, report_json);
        write_file(options.out_dir / ("distances_" + name + ".csv"), series_csv.str());
        write_file(options.out_dir / ("report_" + name + ".csv"), report_csv.str());
        write_file(options.out_dir / ("report_" + name + ".json"), report_json.str());
        if (out.evaluation)
            write_file(options.out_dir / ("evaluation_" + name + ".json"),
                       evaluation_json(*out.evaluation, out.metric,
                                       options.representation)
                               .dump(2) +
                           "\n");
        result.metrics.push_back(std::move(out));
    }
    return result;
}

namespace {

std::string histogram_string(const std::map<int, std::size_t>& histogram) {
    std::string out;
    for (const auto& [order, count] : histogram) {
        if (!out.empty()) out += ';';
        out += std::to_string(order) + ":" + std::to_string(count);
    }
    return out;
}

struct AggregateRun {
    double wall_ms = 0;
    std::uint64_t observations = 0;
    std::uint64_t peak_entries = 0;
    int max_order_found = 0;
    std::size_t rules_total = 0;
    std::map<int, std::size_t> histogram;
    std::vector<RuleSet> rulesets;
};

template <typename MineFn>
AggregateRun run_over_windows(const std::vector<const Window*>& windows, MineFn&& mine) {
    AggregateRun agg;
    for (const Window* window : windows) {
        const auto start = std::chrono::steady_clock::now();
        MineResult mined = mine(*window);
        const auto stop = std::chrono::steady_clock::now();
        agg.wall_ms += std::chrono::duration<double, std::milli>(stop - start).count();
        agg.observations += mined.stats.observations_materialized;
        agg.peak_entries = std::max(agg.peak_entries, mined.stats.peak_table_entries);
        agg.max_order_found = std::max(agg.max_order_found,
                                       mined.rules.max_order_found());
        agg.rules_total += mined.rules.size();
        for (const auto& [order, count] : mined.rules.order_histogram())
            agg.histogram[order] += count;
        agg.rulesets.push_back(std::move(mined.rules));
    }
    return agg;
}

} // namespace

BenchResult run_bench(const BenchOptions& options) {
    const Corpus corpus = load_corpus(options.corpus_path, options.dedupe);
    if (corpus.windows.empty()) throw ArgumentError("bench: corpus has no windows");

    std::vector<const Window*> windows;
    if (options.window) {
        for (const auto& w : corpus.windows)
            if (w.index == *options.window) windows.push_back(&w);
        if (windows.empty())
            throw ArgumentError("bench: window " + std::to_string(*options.window) +
                                " not present");
    } else {
        for (const auto& w : corpus.windows) windows.push_back(&w);
    }

    BenchResult result;
    MinerConfig plus_config;
    plus_config.min_support = options.min_support;

    try_reset_peak_rss();
    AggregateRun plus = run_over_windows(windows, [&](const Window& w) {
        return mine_rules_plus(w, plus_config);
    });
    BenchRow plus_row;
    plus_row.algorithm = "plus";
    plus_row.wall_ms = plus.wall_ms;
    plus_row.observations_materialized = plus.observations;
    plus_row.peak_table_entries = plus.peak_entries;
    plus_row.peak_rss_kb = read_peak_rss_kb();
    plus_row.max_order_found = plus.max_order_found;
    plus_row.rules_total = plus.rules_total;
    plus_row.rule_histogram = histogram_string(plus.histogram);
    result.rows.push_back(plus_row);

    for (int max_order : options.baseline_max_orders) {
        MinerConfig config;
        config.min_support = options.min_support;
        config.max_order = max_order;
        try_reset_peak_rss();
        AggregateRun base = run_over_windows(windows, [&](const Window& w) {
            return mine_rules_baseline(w, config);
        });
        BenchRow row;
        row.algorithm = "baseline";
        row.max_order = max_order;
        row.wall_ms = base.wall_ms;
        row.observations_materialized = base.observations;
        row.peak_table_entries = base.peak_entries;
        row.peak_rss_kb = read_peak_rss_kb();
        row.max_order_found = base.max_order_found;
        row.rules_total = base.rules_total;
        row.rule_histogram = histogram_string(base.histogram);
        result.rows.push_back(std::move(row));

        for (std::size_t i = 0; i < windows.size(); ++i) {
            const int needed = plus.rulesets[i].max_order_found();
            if (max_order >= needed && !(base.rulesets[i] == plus.rulesets[i])) {
                result.equivalence_ok = false;
                result.mismatch_note = "rule sets differ on window " +
                                       std::to_string(windows[i]->index) +
                                       " at baseline max_order " +
                                       std::to_string(max_order);
            }
        }
    }

    if (options.csv_out) {
        std::ostringstream csv;
        save_bench_csv(result, csv);
        write_file(*options.csv_out, csv.str());
    }
    return result;
}

void save_bench_csv(const BenchResult& result, std::ostream& out) {
    out << "algorithm,max_order,wall_ms,observations_materialized,peak_table_entries,"
           "peak_rss_kb,max_order_found,rules_total,rule_histogram\n";
    for (const auto& row : result.rows) {
        out << row.algorithm << ','
            << (row.max_order ? std::to_string(*row.max_order) : std::string()) << ','
            << format_double(row.wall_ms) << ',' << row.observations_materialized << ','
            << row.peak_table_entries << ',' << row.peak_rss_kb << ','
            << row.max_order_found << ',' << row.rules_total << ','
            << row.rule_histogram << '\n';
    }
}

} // namespace honad
