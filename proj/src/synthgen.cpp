#include "honad/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_map>

#include "honad/errors.hpp"
#include "honad/util.hpp"

namespace honad {

int page_right_of(int page, int side) {
    const int row = page / side, col = page % side;
    return row * side + (col + 1) % side;
}

int page_down_of(int page, int side) {
    const int row = page / side, col = page % side;
    return ((row + 1) % side) * side + col;
}

std::string page_label(int page, int side) {
    std::size_t width = std::to_string(side * side - 1).size();
    std::string s = std::to_string(page);
    return std::string(width - s.size(), '0') + s;
}

std::vector<RegimeTableEntry> regime_table() {
    std::vector<RegimeTableEntry> table;
    std::vector<RegimeRule> rules;
    auto emit = [&](int regime) { table.push_back({regime, rules}); };
    auto set_rule = [&](std::vector<int> trigger, double p_right) {
        for (auto& r : rules)
            if (r.trigger == trigger) {
                r.p_right = p_right;
                return;
            }
        rules.push_back({std::move(trigger), p_right});
    };

    emit(1); // random movement
    set_rule({0}, 0.9);
    set_rule({3}, 0.9);
    set_rule({6}, 0.9);
    emit(2); // first-order emergence
    set_rule({0}, 0.1);
    set_rule({3}, 0.1);
    set_rule({6}, 0.1);
    emit(3); // first-order change
    set_rule({27, 28}, 0.9);
    emit(4); // second-order emergence
    set_rule({30, 31}, 0.9);
    set_rule({34, 35}, 0.9);
    set_rule({21, 31}, 0.1);
    set_rule({25, 35}, 0.1);
    emit(5); // complementary second-order emergence
    set_rule({30, 31}, 0.1);
    set_rule({34, 35}, 0.1);
    set_rule({21, 31}, 0.9);
    set_rule({25, 35}, 0.9);
    emit(6); // complementary second-order change
    set_rule({61, 71, 81}, 0.9);
    emit(7); // third-order emergence
    set_rule({64, 74, 84}, 0.9);
    set_rule({67, 77, 87}, 0.9);
    set_rule({73, 74, 84}, 0.1);
    set_rule({76, 77, 87}, 0.1);
    emit(8); // complementary third-order emergence
    set_rule({64, 74, 84}, 0.1);
    set_rule({67, 77, 87}, 0.1);
    set_rule({73, 74, 84}, 0.9);
    set_rule({76, 77, 87}, 0.9);
    emit(9); // complementary third-order change
    set_rule({39, 49, 59}, 0.9);
    set_rule({59}, 11.0 / 30.0);
    emit(10); // complementary mixed-order emergence
    set_rule({39, 49, 59}, 0.1);
    set_rule({59}, 19.0 / 30.0);
    emit(11); // complementary mixed-order change
    return table;
}

int regime_of_window(int window, int windows_per_regime) {
    return (window - 1) / windows_per_regime + 1;
}

namespace {

/// Active rules of one regime indexed for O(1) longest-trigger matching.
struct RuleIndex {
    std::vector<double> order1;                    // by current page, NaN = none
    std::unordered_map<std::uint64_t, double> order2; // key prev*P + cur
    std::unordered_map<std::uint64_t, double> order3; // key (p2*P + p1)*P + cur

    RuleIndex(const std::vector<RegimeRule>& rules, int pages)
        : order1(pages, std::numeric_limits<double>::quiet_NaN()) {
        const std::uint64_t P = static_cast<std::uint64_t>(pages);
        for (const auto& rule : rules) {
            switch (rule.order()) {
                case 1: order1[rule.trigger[0]] = rule.p_right; break;
                case 2:
                    order2[rule.trigger[0] * P + rule.trigger[1]] = rule.p_right;
                    break;
                case 3:
                    order3[(rule.trigger[0] * P + rule.trigger[1]) * P +
                           rule.trigger[2]] = rule.p_right;
                    break;
                default:
                    throw ArgumentError("regime rules support orders 1-3 only");
            }
        }
    }

    double p_right(int prev2, int prev1, int cur, int pages) const {
        const std::uint64_t P = static_cast<std::uint64_t>(pages);
        if (prev2 >= 0) {
            auto it = order3.find((static_cast<std::uint64_t>(prev2) * P + prev1) * P +
                                  cur);
            if (it != order3.end()) return it->second;
        }
        if (prev1 >= 0) {
            auto it = order2.find(static_cast<std::uint64_t>(prev1) * P + cur);
            if (it != order2.end()) return it->second;
        }
        const double p1 = order1[cur];
        return std::isnan(p1) ? 0.5 : p1;
    }
};

constexpr double kInv2Pow53 = 1.0 / 9007199254740992.0;

std::string boundary_class(int regime) {
    switch (regime) {
        case 2:
        case 3: return "first";
        case 4: return "second";
        case 5:
        case 6:
        case 8:
        case 9: return "complementary";
        case 7: return "third";
        case 10:
        case 11: return "mixed";
    }
    throw InternalError("no boundary class for regime " + std::to_string(regime));
}

} // namespace

GroundTruth generate(const ScenarioConfig& config, std::ostream& out) {
    if (config.grid.side != 10)
        throw ArgumentError("generate: the 11-regime scenario is defined on a 10x10 "
                            "grid (page positions assume side = 10)");
    if (config.n_users < 1 || config.steps_per_user < 1 || config.windows_per_regime < 1)
        throw ArgumentError("generate: counts must be >= 1");

    const int pages = config.grid.pages();
    const auto table = regime_table();
    std::vector<RuleIndex> indices;
    indices.reserve(table.size());
    for (const auto& entry : table) indices.emplace_back(entry.rules, pages);

    std::vector<std::string> labels(pages);
    for (int p = 0; p < pages; ++p) labels[p] = page_label(p, config.grid.side);

    out << "# synthetic clickstream corpus (toroidal " << config.grid.side << "x"
        << config.grid.side << " grid, right/down moves)\n";
    out << "# generator=grid-clickstream-v1 rng=mt19937_64 seed=" << config.seed
        << " users=" << config.n_users << " steps=" << config.steps_per_user
        << " windows_per_regime=" << config.windows_per_regime << "\n";
    out << "# draw order: per window, per user: start = next() % pages; each move:"
           " right iff (next()>>11)/2^53 < p_right\n";

    std::mt19937_64 rng(config.seed);
    const int total_windows = static_cast<int>(table.size()) * config.windows_per_regime;
    std::string line;
    for (int window = 1; window <= total_windows; ++window) {
        const RuleIndex& rules =
            indices[regime_of_window(window, config.windows_per_regime) - 1];
        for (int user = 0; user < config.n_users; ++user) {
            int prev2 = -1, prev1 = -1;
            int cur = static_cast<int>(rng() % static_cast<std::uint64_t>(pages));
            line.clear();
            line += std::to_string(window);
            line += " u";
            line += std::to_string(user);
            line += ' ';
            line += labels[cur];
            for (int step = 0; step < config.steps_per_user; ++step) {
                const double p = rules.p_right(prev2, prev1, cur, pages);
                const double u = static_cast<double>(rng() >> 11) * kInv2Pow53;
                const int next = u < p ? page_right_of(cur, config.grid.side)
                                       : page_down_of(cur, config.grid.side);
                prev2 = prev1;
                prev1 = cur;
                cur = next;
                line += ' ';
                line += labels[cur];
            }
            line += '\n';
            out << line;
        }
    }

    GroundTruth truth;
    for (std::size_t r = 2; r <= table.size(); ++r)
        truth.boundaries.push_back(
            {static_cast<int>(r - 1) * config.windows_per_regime + 1,
             boundary_class(static_cast<int>(r))});
    return truth;
}

GroundTruth generate(const ScenarioConfig& config, const std::filesystem::path& out) {
    std::ofstream file(out);
    if (!file) throw Error("cannot write corpus file: " + out.string());
    GroundTruth truth = generate(config, file);
    file.flush();
    if (!file) throw Error("failed writing corpus file: " + out.string());
    return truth;
}

void save_ground_truth(const GroundTruth& truth, std::ostream& out) {
    out << "# <boundary-window> <anomaly-class>\n";
    for (const auto& b : truth.boundaries)
        out << b.window << ' ' << b.anomaly_class << '\n';
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open ground-truth file: " + path.string());
    GroundTruth truth;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        if (fields.size() != 2)
            throw ParseError(path.filename().string() + ":" + std::to_string(line_no) +
                             ": expected `<window> <class>`");
        GroundTruth::Boundary b;
        b.window = static_cast<int>(parse_u64(fields[0], "boundary window"));
        b.anomaly_class = std::string(fields[1]);
        truth.boundaries.push_back(std::move(b));
    }
    return truth;
}

} // namespace honad
