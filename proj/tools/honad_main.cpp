// honad: higher-order-network anomaly detection for sequential data.
//
// Subcommands: generate, pipeline, mine, graph, distance, detect, bench.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 equivalence failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "honad/corpus.hpp"
#include "honad/detector.hpp"
#include "honad/distances.hpp"
#include "honad/errors.hpp"
#include "honad/hon_graph.hpp"
#include "honad/pipeline.hpp"
#include "honad/rule_miner.hpp"
#include "honad/synthgen.hpp"
#include "honad/util.hpp"

namespace {

constexpr const char* kVersion =
    "honad 1.0.0 (formats: corpus=1 rules=1 graph=1 report=1 bench=1)";

std::vector<honad::MetricKind> parse_metric_list(const std::string& csv) {
    std::vector<honad::MetricKind> metrics;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) metrics.push_back(honad::parse_metric(item));
    if (metrics.empty()) throw honad::ArgumentError("empty metric list");
    return metrics;
}

honad::HonGraph load_graph_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw honad::ParseError("cannot open graph file: " + path.string());
    return honad::parse_graph(in, path.filename().string());
}

int cmd_generate(const honad::GenerateOptions& options) {
    honad::GenerateSummary summary = honad::run_generate(options);
    std::cout << "windows=" << summary.windows
              << " trajectories=" << summary.trajectories << " L=" << summary.clicks
              << " N=" << summary.distinct_pages << "\n";
    std::cout << "corpus: " << options.corpus_out.string() << "\n";
    std::cout << "truth:  " << options.truth_out.string() << " ("
              << summary.truth.boundaries.size() << " boundaries)\n";
    return 0;
}

int cmd_pipeline(const honad::PipelineOptions& options) {
    honad::PipelineResult result = honad::run_pipeline(options);
    std::cout << "windows=" << result.windows
              << " max_order_found=" << result.max_order_found
              << " observations=" << result.mining_total.observations_materialized
              << "\n";
    for (const auto& metric : result.metrics) {
        std::cout << honad::metric_cli_name(metric.metric) << ": flagged=[";
        for (std::size_t i = 0; i < metric.report.flagged_windows.size(); ++i)
            std::cout << (i ? "," : "") << metric.report.flagged_windows[i];
        std::cout << "]";
        if (metric.evaluation)
            std::cout << " precision=" << honad::format_double(metric.evaluation->precision)
                      << " recall=" << honad::format_double(metric.evaluation->recall);
        std::cout << "\n";
    }
    std::cout << "artifacts: " << options.out_dir.string() << "\n";
    return 0;
}

struct MineArgs {
    std::filesystem::path input;
    std::filesystem::path out_dir = ".";
    std::string algorithm = "plus";
    std::uint32_t min_support = 1;
    int max_order = 0; // required for baseline
    int window = 0;    // 0 = all
    bool dedupe = false;
};

int cmd_mine(const MineArgs& args) {
    honad::Corpus corpus = honad::load_corpus(args.input, args.dedupe);
    std::filesystem::create_directories(args.out_dir);
    honad::MinerConfig config;
    config.min_support = args.min_support;
    if (args.algorithm == "baseline") {
        if (args.max_order < 1)
            throw honad::ArgumentError("baseline requires --max-order >= 1");
        config.max_order = args.max_order;
    } else if (args.algorithm != "plus") {
        throw honad::ArgumentError("--algorithm must be plus or baseline");
    }
    for (const auto& window : corpus.windows) {
        if (args.window != 0 && window.index != args.window) continue;
        honad::MineResult mined = args.algorithm == "plus"
                                      ? honad::mine_rules_plus(window, config)
                                      : honad::mine_rules_baseline(window, config);
        const auto path =
            args.out_dir / ("rules_window_" + std::to_string(window.index) + ".txt");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw honad::Error("cannot write " + path.string());
        honad::save_rules(mined.rules, corpus.vocab, out);
        std::cout << "window " << window.index << ": rules=" << mined.rules.size()
                  << " max_order=" << mined.rules.max_order_found()
                  << " observations=" << mined.stats.observations_materialized
                  << " tests=" << mined.stats.divergence_tests
                  << " prunes=" << mined.stats.prunes_by_bound << " -> "
                  << path.string() << "\n";
    }
    return 0;
}

int cmd_graph(const std::filesystem::path& rules_path,
              const std::filesystem::path& out_path) {
    std::ifstream in(rules_path);
    if (!in) throw honad::ParseError("cannot open rules file: " + rules_path.string());
    honad::Vocab vocab;
    honad::RuleSet rules =
        honad::parse_rules(in, vocab, rules_path.filename().string());
    honad::HonGraph graph = honad::build_graph(rules, vocab);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw honad::Error("cannot write " + out_path.string());
    honad::save_graph(graph, out);
    std::cout << "nodes=" << graph.nodes().size() << " edges=" << graph.edges().size()
              << " total_weight=" << honad::format_double(graph.total_weight()) << "\n";
    return 0;
}

int cmd_distance(const std::filesystem::path& a, const std::filesystem::path& b,
                 const std::string& metric, const honad::SpectralParams& params) {
    honad::HonGraph g = load_graph_file(a);
    honad::HonGraph h = load_graph_file(b);
    double d = honad::compute_distance(honad::parse_metric(metric), g, h, params);
    std::cout << honad::format_double(d) << "\n";
    return 0;
}

int cmd_detect(const std::filesystem::path& series_path,
               const honad::DetectorConfig& config, const std::string& out_prefix) {
    std::ifstream in(series_path);
    if (!in)
        throw honad::ParseError("cannot open series file: " + series_path.string());
    honad::DistanceSeries series =
        honad::load_series_csv(in, series_path.filename().string());
    honad::AnomalyReport report = honad::detect(series, config);
    {
        std::ofstream out(out_prefix + ".csv", std::ios::binary);
        if (!out) throw honad::Error("cannot write " + out_prefix + ".csv");
        honad::save_report_csv(report, out);
    }
    {
        std::ofstream out(out_prefix + ".json", std::ios::binary);
        if (!out) throw honad::Error("cannot write " + out_prefix + ".json");
        honad::save_report_json(report, out);
    }
    std::cout << "flagged=[";
    for (std::size_t i = 0; i < report.flagged_windows.size(); ++i)
        std::cout << (i ? "," : "") << report.flagged_windows[i];
    std::cout << "]\n";
    return 0;
}

int cmd_bench(const honad::BenchOptions& options) {
    honad::BenchResult result = honad::run_bench(options);
    std::ostringstream csv;
    honad::save_bench_csv(result, csv);
    std::cout << csv.str();
    if (!result.equivalence_ok) {
        std::cerr << "equivalence FAILED: " << result.mismatch_note << "\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Higher-order-network change-point detection for sequential data"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Write a synthetic clickstream corpus");
    honad::GenerateOptions gen_options;
    int gen_side = 10;
    generate->add_option("--side", gen_side, "Grid side (the 11-regime scenario needs 10)");
    generate->add_option("--users", gen_options.scenario.n_users, "Users per window")
        ->check(CLI::PositiveNumber);
    generate->add_option("--steps", gen_options.scenario.steps_per_user,
                         "Moves per user per window")
        ->check(CLI::PositiveNumber);
    generate->add_option("--windows-per-regime", gen_options.scenario.windows_per_regime,
                         "Windows per regime (total = 11x)")
        ->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen_options.scenario.seed, "RNG seed");
    generate->add_option("--out", gen_options.corpus_out, "Corpus output path")
        ->required();
    generate->add_option("--truth-out", gen_options.truth_out,
                         "Ground-truth output path (default: <out>.truth)");

    // pipeline
    auto* pipeline = app.add_subcommand(
        "pipeline", "Mine windows, build graphs, score distances, detect change points");
    honad::PipelineOptions pipe_options;
    std::string pipe_metrics = "weight,mcs,modality,entropy,spectral";
    std::string pipe_repr = "hon";
    std::string pipe_mode = "running";
    std::filesystem::path pipe_truth;
    pipeline->add_option("--input,-i", pipe_options.corpus_path, "Corpus file")->required();
    pipeline->add_option("--out-dir,-o", pipe_options.out_dir, "Artifact directory")
        ->required();
    pipeline->add_option("--representation,-r", pipe_repr, "fon|hon");
    pipeline->add_option("--metrics,-m", pipe_metrics,
                         "Comma list of weight|mcs|modality|entropy|spectral");
    pipeline->add_option("--min-support", pipe_options.min_support, "Miner MinSupport")
        ->check(CLI::PositiveNumber);
    pipeline->add_flag("--dedupe", pipe_options.dedupe,
                       "Collapse consecutive duplicate steps on load");
    pipeline->add_option("--mode", pipe_mode, "Detector mode: running|fixed");
    pipeline->add_option("--threshold", pipe_options.detector.fixed_threshold,
                         "Fixed-mode threshold Delta");
    pipeline->add_option("--window-k", pipe_options.detector.window_k,
                         "Running-statistics window");
    pipeline->add_option("--multiplier", pipe_options.detector.sigma_multiplier,
                         "Sigma multiplier");
    pipeline->add_option("--sigma-floor", pipe_options.detector.sigma_floor,
                         "Sigma floor");
    pipeline->add_option("--truth", pipe_truth, "Ground-truth file for evaluation");
    pipeline->add_flag("--slack", pipe_options.slack,
                       "Count boundaries detected within +-1 window");
    pipeline->add_option("--jobs,-j", pipe_options.jobs, "Worker threads")
        ->check(CLI::PositiveNumber);
    pipeline->add_option("--spectral-k", pipe_options.spectral.num_eigenvalues,
                         "Top-k eigenvalues for the spectral metric");

    // mine
    auto* mine = app.add_subcommand("mine", "Extract dependency rules per window");
    MineArgs mine_args;
    mine->add_option("--input,-i", mine_args.input, "Corpus file")->required();
    mine->add_option("--out-dir,-o", mine_args.out_dir, "Rules output directory");
    mine->add_option("--algorithm,-a", mine_args.algorithm, "plus|baseline");
    mine->add_option("--min-support", mine_args.min_support, "MinSupport")
        ->check(CLI::PositiveNumber);
    mine->add_option("--max-order", mine_args.max_order, "MaxOrder (baseline)");
    mine->add_option("--window,-w", mine_args.window, "Only this window index");
    mine->add_flag("--dedupe", mine_args.dedupe, "Collapse consecutive duplicates");

    // graph
    auto* graph = app.add_subcommand("graph", "Wire a rules file into a HON graph");
    std::filesystem::path graph_rules, graph_out;
    graph->add_option("--rules", graph_rules, "Rules file")->required();
    graph->add_option("--out", graph_out, "Graph output path")->required();

    // distance
    auto* distance = app.add_subcommand("distance", "Distance between two graph files");
    std::filesystem::path dist_a, dist_b;
    std::string dist_metric = "weight";
    honad::SpectralParams dist_params;
    distance->add_option("--a", dist_a, "First graph file")->required();
    distance->add_option("--b", dist_b, "Second graph file")->required();
    distance->add_option("--metric,-m", dist_metric,
                         "weight|mcs|modality|entropy|spectral");
    distance->add_option("--spectral-k", dist_params.num_eigenvalues, "Top-k eigenvalues");

    // detect
    auto* detect = app.add_subcommand("detect", "Flag change points in a distance series");
    std::filesystem::path detect_series;
    std::string detect_mode = "running";
    std::string detect_prefix = "report";
    honad::DetectorConfig detect_config;
    detect->add_option("--series", detect_series, "distances_*.csv file")->required();
    detect->add_option("--mode", detect_mode, "running|fixed");
    detect->add_option("--threshold", detect_config.fixed_threshold,
                       "Fixed-mode threshold Delta");
    detect->add_option("--window-k", detect_config.window_k, "Running window");
    detect->add_option("--multiplier", detect_config.sigma_multiplier, "Sigma multiplier");
    detect->add_option("--sigma-floor", detect_config.sigma_floor, "Sigma floor");
    detect->add_option("--out-prefix", detect_prefix, "Output prefix (.csv/.json)");

    // bench
    auto* bench = app.add_subcommand(
        "bench", "Compare lazy and exhaustive mining on the same corpus");
    honad::BenchOptions bench_options;
    std::string bench_orders = "1,2,3,4,5,6";
    int bench_window = 0;
    std::filesystem::path bench_csv;
    bench->add_option("--input,-i", bench_options.corpus_path, "Corpus file")->required();
    bench->add_option("--max-orders", bench_orders, "Comma list of baseline MaxOrders");
    bench->add_option("--min-support", bench_options.min_support, "MinSupport")
        ->check(CLI::PositiveNumber);
    bench->add_option("--window,-w", bench_window, "Only this window index");
    bench->add_option("--out", bench_csv, "Also write the report CSV here");
    bench->add_flag("--dedupe", bench_options.dedupe, "Collapse consecutive duplicates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help/message
        return code == 0 ? 0 : 1;    // usage errors exit 1
    }

    try {
        if (*generate) {
            gen_options.scenario.grid.side = gen_side;
            if (gen_options.truth_out.empty())
                gen_options.truth_out = gen_options.corpus_out.string() + ".truth";
            return cmd_generate(gen_options);
        }
        if (*pipeline) {
            pipe_options.representation = honad::parse_representation(pipe_repr);
            pipe_options.metrics = parse_metric_list(pipe_metrics);
            pipe_options.detector.mode = pipe_mode == "fixed"
                                             ? honad::DetectorMode::fixed
                                             : honad::DetectorMode::running;
            if (pipe_mode != "fixed" && pipe_mode != "running")
                throw honad::ArgumentError("--mode must be running or fixed");
            if (!pipe_truth.empty()) pipe_options.truth_path = pipe_truth;
            return cmd_pipeline(pipe_options);
        }
        if (*mine) return cmd_mine(mine_args);
        if (*graph) return cmd_graph(graph_rules, graph_out);
        if (*distance) return cmd_distance(dist_a, dist_b, dist_metric, dist_params);
        if (*detect) {
            detect_config.mode = detect_mode == "fixed" ? honad::DetectorMode::fixed
                                                        : honad::DetectorMode::running;
            if (detect_mode != "fixed" && detect_mode != "running")
                throw honad::ArgumentError("--mode must be running or fixed");
            return cmd_detect(detect_series, detect_config, detect_prefix);
        }
        if (*bench) {
            std::stringstream ss(bench_orders);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty())
                    bench_options.baseline_max_orders.push_back(
                        static_cast<int>(honad::parse_u64(item, "--max-orders")));
            if (bench_window != 0) bench_options.window = bench_window;
            if (!bench_csv.empty()) bench_options.csv_out = bench_csv;
            return cmd_bench(bench_options);
        }
    } catch (const honad::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const honad::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const honad::StructuralError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const honad::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
