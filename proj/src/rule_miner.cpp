#include "honad/rule_miner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "honad/errors.hpp"
#include "honad/util.hpp"

namespace honad {

double NextStepDistribution::probability(EntityId e) const {
    auto it = std::lower_bound(counts.begin(), counts.end(), e,
                               [](const auto& p, EntityId id) { return p.first < id; });
    if (it == counts.end() || it->first != e) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(support);
}

double NextStepDistribution::min_probability() const {
    std::uint64_t min_count = 0;
    for (const auto& [entity, count] : counts)
        if (min_count == 0 || count < min_count) min_count = count;
    if (min_count == 0) return 0.0;
    return static_cast<double>(min_count) / static_cast<double>(support);
}

double kl_divergence(const NextStepDistribution& ext, const NextStepDistribution& base) {
    double sum = 0.0;
    auto bit = base.counts.begin();
    for (const auto& [entity, count] : ext.counts) {
        while (bit != base.counts.end() && bit->first < entity) ++bit;
        if (bit == base.counts.end() || bit->first != entity)
            throw InternalError("kl_divergence: entity present in extension but absent "
                                "from base distribution");
        const double p = static_cast<double>(count) / static_cast<double>(ext.support);
        const double q =
            static_cast<double>(bit->second) / static_cast<double>(base.support);
        sum += p * std::log2(p / q);
    }
    return sum < 0.0 ? 0.0 : sum; // clamp -0.0 and rounding dust on identical inputs
}

double dynamic_threshold(int order_ext, std::uint64_t support_ext) {
    if (support_ext == 0)
        throw ArgumentError("dynamic_threshold: a path with zero support cannot exist");
    return static_cast<double>(order_ext) /
           std::log2(1.0 + static_cast<double>(support_ext));
}

double divergence_upper_bound(const NextStepDistribution& d) {
    if (d.counts.empty())
        throw ArgumentError("divergence_upper_bound: empty distribution");
    const double bound = -std::log2(d.min_probability());
    return bound < 0.0 ? 0.0 : bound;
}

bool should_prune(const NextStepDistribution& valid, int order_ext,
                  std::uint64_t current_support) {
    return divergence_upper_bound(valid) < dynamic_threshold(order_ext, current_support);
}

// --- ObservationStore -------------------------------------------------------

void ObservationStore::note_entries(std::int64_t delta) {
    live_entries_ += delta;
    if (live_entries_ > static_cast<std::int64_t>(stats_.peak_table_entries))
        stats_.peak_table_entries = static_cast<std::uint64_t>(live_entries_);
}

ObservationStore::Observation& ObservationStore::insert_instances(
    const ContextPath& path, std::vector<std::pair<EntityId, std::uint64_t>>&& counts,
    std::uint64_t support, std::vector<ObservationPosition>&& positions) {
    std::sort(counts.begin(), counts.end());
    Observation obs;
    obs.dist.counts = std::move(counts);
    obs.dist.support = support;
    obs.positions = std::move(positions);
    auto [it, inserted] = table_.emplace(path, std::move(obs));
    note_entries(1 + static_cast<std::int64_t>(it->second.dist.counts.size()) +
                 static_cast<std::int64_t>(it->second.positions.size()));
    stats_.observations_materialized += support;
    if (path.order() > stats_.max_materialized_order)
        stats_.max_materialized_order = path.order();
    return it->second;
}

namespace {

void bump_count(std::vector<std::pair<EntityId, std::uint64_t>>& counts, EntityId e) {
    for (auto& [entity, count] : counts)
        if (entity == e) {
            ++count;
            return;
        }
    counts.emplace_back(e, 1);
}

} // namespace

std::vector<ContextPath> ObservationStore::build_first_order() {
    struct Accum {
        std::vector<std::pair<EntityId, std::uint64_t>> counts;
        std::vector<ObservationPosition> positions;
    };
    std::unordered_map<EntityId, Accum> accums;
    const auto& trajectories = window_->trajectories;
    for (std::uint32_t t = 0; t < trajectories.size(); ++t) {
        const auto& steps = trajectories[t].steps;
        for (std::uint32_t i = 0; i + 1 < steps.size(); ++i) {
            Accum& a = accums[steps[i]];
            bump_count(a.counts, steps[i + 1]);
            a.positions.push_back({t, i});
        }
    }
    std::vector<ContextPath> paths;
    paths.reserve(accums.size());
    for (auto& [entity, accum] : accums) {
        ContextPath path{{entity}};
        insert_instances(path, std::move(accum.counts), accum.positions.size(),
                         std::move(accum.positions));
        paths.push_back(std::move(path));
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

std::vector<ContextPath> ObservationStore::build_all_orders(int max_order,
                                                            std::uint32_t min_support) {
    struct Accum {
        std::vector<std::pair<EntityId, std::uint64_t>> counts;
        std::uint64_t support = 0;
    };
    std::unordered_map<ContextPath, Accum, ContextPathHash> accums;
    const auto& trajectories = window_->trajectories;
    for (std::uint32_t t = 0; t < trajectories.size(); ++t) {
        const auto& steps = trajectories[t].steps;
        for (std::uint32_t i = 0; i + 1 < steps.size(); ++i) {
            const int deepest = std::min<int>(max_order, static_cast<int>(i) + 1);
            for (int k = 1; k <= deepest; ++k) {
                ContextPath path{{steps.begin() + (i + 1 - k), steps.begin() + (i + 1)}};
                Accum& a = accums[std::move(path)];
                bump_count(a.counts, steps[i + 1]);
                ++a.support;
            }
        }
    }
    // Keep order-1 unconditionally; higher orders must meet min_support.
    std::vector<ContextPath> first_order;
    for (auto& [path, accum] : accums) {
        if (path.order() >= 2 && accum.support < min_support) continue;
        insert_instances(path, std::move(accum.counts), accum.support, {});
        if (path.order() == 1) first_order.push_back(path);
    }
    // Child links: order k+1 paths hang off their order-k suffix. The suffix
    // is always present: its support dominates the child's, and order-1
    // paths are kept unconditionally.
    for (auto& [path, obs] : table_) {
        if (path.order() < 2) continue;
        auto parent = table_.find(path.suffix());
        if (parent == table_.end())
            throw InternalError("build_all_orders: suffix of a stored path is missing");
        parent->second.children.push_back(path);
        note_entries(1);
    }
    for (auto& [path, obs] : table_)
        std::sort(obs.children.begin(), obs.children.end());
    std::sort(first_order.begin(), first_order.end());
    return first_order;
}

std::vector<ContextPath> ObservationStore::extend_observations(const ContextPath& path,
                                                               std::uint32_t min_support) {
    auto it = table_.find(path);
    if (it == table_.end())
        throw ArgumentError("extend_observations: path not present in store");
    const std::uint32_t k = static_cast<std::uint32_t>(path.order());

    struct Accum {
        std::vector<std::pair<EntityId, std::uint64_t>> counts;
        std::vector<ObservationPosition> positions;
    };
    std::unordered_map<EntityId, Accum> by_previous;
    for (const ObservationPosition& pos : it->second.positions) {
        if (pos.offset < k) continue; // context starts the trajectory: nothing precedes
        const auto& steps = window_->trajectories[pos.trajectory].steps;
        Accum& a = by_previous[steps[pos.offset - k]];
        bump_count(a.counts, steps[pos.offset + 1]);
        a.positions.push_back(pos);
    }

    std::vector<ContextPath> extensions;
    for (auto& [previous, accum] : by_previous) {
        if (accum.positions.size() < min_support) continue;
        ContextPath ext = path.extend_with(previous);
        insert_instances(ext, std::move(accum.counts), accum.positions.size(),
                         std::move(accum.positions));
        extensions.push_back(std::move(ext));
    }
    std::sort(extensions.begin(), extensions.end());
    return extensions;
}

const ObservationStore::Observation* ObservationStore::find(const ContextPath& path) const {
    auto it = table_.find(path);
    return it == table_.end() ? nullptr : &it->second;
}

// --- RuleSet -----------------------------------------------------------------

void RuleSet::add(const ContextPath& context, NextStepDistribution dist) {
    auto [it, inserted] = rules_.emplace(context, std::move(dist));
    if (inserted && context.order() > max_order_found_)
        max_order_found_ = context.order();
}

bool RuleSet::contains(const ContextPath& context) const {
    return rules_.find(context) != rules_.end();
}

const NextStepDistribution* RuleSet::find(const ContextPath& context) const {
    auto it = rules_.find(context);
    return it == rules_.end() ? nullptr : &it->second;
}

std::map<int, std::size_t> RuleSet::order_histogram() const {
    std::map<int, std::size_t> histogram;
    for (const auto& [context, dist] : rules_) ++histogram[context.order()];
    return histogram;
}

// --- Rule growing ------------------------------------------------------------

namespace {

// Shared acceptance walk. `lazy` switches between on-demand extension with
// the Eq.-style pruning bound (BuildHON+) and lookup of pre-materialized
// children capped at max_order (BuildHON).
class Miner {
public:
    Miner(ObservationStore& store, const MinerConfig& config, bool lazy,
          const MinerHooks* hooks)
        : store_(store), config_(config), lazy_(lazy), hooks_(hooks) {}

    RuleSet run() {
        RuleSet rules;
        std::vector<ContextPath> roots =
            lazy_ ? store_.build_first_order()
                  : store_.build_all_orders(*config_.max_order, config_.min_support);

        struct Frame {
            ContextPath path;
            const NextStepDistribution* valid;
            std::uint64_t path_support;
        };
        std::vector<Frame> stack;
        for (const ContextPath& root : roots) {
            const auto* obs = store_.find(root);
            rules.add(root, obs->dist); // the FON is always complete
            if (obs->dist.support >= config_.min_support)
                stack.push_back({root, &obs->dist, obs->dist.support});
        }

        std::vector<ContextPath> accepted;
        while (!stack.empty()) {
            Frame frame = std::move(stack.back());
            stack.pop_back();

            if (lazy_) {
                if (should_prune(*frame.valid, frame.path.order() + 1,
                                 frame.path_support)) {
                    ++store_.stats().prunes_by_bound;
                    if (hooks_ && hooks_->on_prune)
                        hooks_->on_prune(frame.path, *frame.valid, frame.path_support);
                    continue;
                }
            } else if (frame.path.order() >= *config_.max_order) {
                continue;
            }

            std::vector<ContextPath> lazy_extensions;
            if (lazy_)
                lazy_extensions =
                    store_.extend_observations(frame.path, config_.min_support);
            const std::vector<ContextPath>& extensions =
                lazy_ ? lazy_extensions : store_.find(frame.path)->children;
            for (const ContextPath& ext : extensions) {
                const auto* ext_obs = store_.find(ext);
                ++store_.stats().divergence_tests;
                const double divergence = kl_divergence(ext_obs->dist, *frame.valid);
                const double threshold =
                    dynamic_threshold(ext.order(), ext_obs->dist.support);
                if (divergence > threshold) {
                    accepted.push_back(ext);
                    stack.push_back({ext, &ext_obs->dist, ext_obs->dist.support});
                } else {
                    stack.push_back({ext, frame.valid, ext_obs->dist.support});
                }
            }
        }

        for (const ContextPath& context : accepted) {
            const auto* obs = store_.find(context);
            rules.add(context, obs->dist);
            // Suffix closure: graph wiring needs every intermediate context.
            ContextPath suffix = context;
            while (suffix.order() > 1) {
                suffix = suffix.suffix();
                if (rules.contains(suffix)) break;
                rules.add(suffix, store_.find(suffix)->dist);
            }
        }
        return rules;
    }

private:
    ObservationStore& store_;
    const MinerConfig& config_;
    bool lazy_;
    const MinerHooks* hooks_;
};

void require_window(const Window& window, const char* who) {
    if (window.trajectories.empty())
        throw ArgumentError(std::string(who) + ": window is empty");
}

} // namespace

MineResult mine_rules_plus(const Window& window, const MinerConfig& config,
                           const MinerHooks* hooks) {
    require_window(window, "mine_rules_plus");
    if (config.min_support < 1)
        throw ArgumentError("mine_rules_plus: min_support must be >= 1");
    ObservationStore store(window);
    Miner miner(store, config, /*lazy=*/true, hooks);
    MineResult result;
    result.rules = miner.run();
    result.stats = store.stats();
    return result;
}

MineResult mine_rules_baseline(const Window& window, const MinerConfig& config,
                               const MinerHooks* hooks) {
    require_window(window, "mine_rules_baseline");
    if (!config.max_order || *config.max_order < 1)
        throw ArgumentError("mine_rules_baseline: max_order >= 1 is required");
    if (config.min_support < 1)
        throw ArgumentError("mine_rules_baseline: min_support must be >= 1");
    ObservationStore store(window);
    Miner miner(store, config, /*lazy=*/false, hooks);
    MineResult result;
    result.rules = miner.run();
    result.stats = store.stats();
    return result;
}

// --- Serialization -----------------------------------------------------------

namespace {

std::string context_string(const ContextPath& context, const Vocab& vocab) {
    std::string out;
    for (std::size_t i = 0; i < context.entities.size(); ++i) {
        if (i) out += '|';
        out += vocab.token(context.entities[i]);
    }
    return out;
}

} // namespace

void save_rules(const RuleSet& rules, const Vocab& vocab, std::ostream& out) {
    std::vector<std::pair<std::string, const NextStepDistribution*>> lines;
    lines.reserve(rules.size());
    for (const auto& [context, dist] : rules.rules())
        lines.emplace_back(context_string(context, vocab), &dist);
    std::sort(lines.begin(), lines.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [context, dist] : lines) {
        out << context << " ->";
        std::vector<std::pair<std::string, std::uint64_t>> steps;
        steps.reserve(dist->counts.size());
        for (const auto& [entity, count] : dist->counts)
            steps.emplace_back(vocab.token(entity), count);
        std::sort(steps.begin(), steps.end());
        for (const auto& [token, count] : steps) out << ' ' << token << ':' << count;
        out << '\n';
    }
}

std::string format_rules(const RuleSet& rules, const Vocab& vocab) {
    std::ostringstream out;
    save_rules(rules, vocab, out);
    return out.str();
}

RuleSet parse_rules(std::istream& in, Vocab& vocab, const std::string& source_name) {
    RuleSet rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        auto where = [&] { return source_name + ":" + std::to_string(line_no); };
        if (fields.size() < 3 || fields[1] != "->")
            throw ParseError(where() + ": expected `<context> -> <next>:<count> ...`");

        ContextPath context;
        std::string_view ctx = fields[0];
        std::size_t start = 0;
        while (start <= ctx.size()) {
            std::size_t sep = ctx.find('|', start);
            std::string_view token =
                ctx.substr(start, sep == std::string_view::npos ? sep : sep - start);
            try {
                context.entities.push_back(vocab.intern(token));
            } catch (const ParseError& e) {
                throw ParseError(where() + ": " + e.what());
            }
            if (sep == std::string_view::npos) break;
            start = sep + 1;
        }

        NextStepDistribution dist;
        for (std::size_t i = 2; i < fields.size(); ++i) {
            std::size_t colon = fields[i].rfind(':');
            if (colon == std::string_view::npos || colon == 0)
                throw ParseError(where() + ": expected <next>:<count>, got '" +
                                 std::string(fields[i]) + "'");
            EntityId entity;
            try {
                entity = vocab.intern(fields[i].substr(0, colon));
            } catch (const ParseError& e) {
                throw ParseError(where() + ": " + e.what());
            }
            std::uint64_t count =
                parse_u64(fields[i].substr(colon + 1), where() + ": count");
            if (count == 0) throw ParseError(where() + ": count must be positive");
            dist.counts.emplace_back(entity, count);
            dist.support += count;
        }
        std::sort(dist.counts.begin(), dist.counts.end());
        rules.add(context, std::move(dist));
    }
    return rules;
}

} // namespace honad
