#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "honad/corpus.hpp"
#include "honad/vocab.hpp"

namespace honad {

/// A context path [s1 .. sk], oldest first, most recent last. Order = length.
struct ContextPath {
    std::vector<EntityId> entities;

    int order() const { return static_cast<int>(entities.size()); }

    /// Drops the oldest entity: the order-(k-1) path this one extends.
    ContextPath suffix() const {
        return ContextPath{{entities.begin() + 1, entities.end()}};
    }

    /// Prepends one more previous step.
    ContextPath extend_with(EntityId previous) const {
        ContextPath ext;
        ext.entities.reserve(entities.size() + 1);
        ext.entities.push_back(previous);
        ext.entities.insert(ext.entities.end(), entities.begin(), entities.end());
        return ext;
    }

    bool operator==(const ContextPath&) const = default;
    auto operator<=>(const ContextPath&) const = default;
};

struct ContextPathHash {
    std::size_t operator()(const ContextPath& p) const {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (EntityId id : p.entities) {
            h ^= id;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Empirical next-step distribution of a context path. Counts are kept
/// sorted by entity id; probabilities are exactly count/support.
struct NextStepDistribution {
    std::vector<std::pair<EntityId, std::uint64_t>> counts;
    std::uint64_t support = 0; // sum of counts, >= 1 once observed

    double probability(EntityId e) const;
    double min_probability() const;
    bool operator==(const NextStepDistribution&) const = default;
};

/// D_KL(ext || base) in bits. Every entity with positive probability in
/// `ext` must be present in `base` (structurally guaranteed when `ext`
/// extends `base`); a violation throws InternalError.
double kl_divergence(const NextStepDistribution& ext, const NextStepDistribution& base);

/// Significance bar for accepting an order-`order_ext` extension with the
/// given support: order_ext / log2(1 + support_ext). Rises with order and
/// with falling support.
double dynamic_threshold(int order_ext, std::uint64_t support_ext);

/// Largest divergence any extension of a path with distribution `d` can
/// reach: -log2(min positive probability of d).
double divergence_upper_bound(const NextStepDistribution& d);

/// True iff no extension of the current path can ever pass the significance
/// test: the divergence bound of the valid distribution falls below the
/// smallest threshold any extension will face (order_ext with the current
/// path's support, which upper-bounds every extension's support).
bool should_prune(const NextStepDistribution& valid, int order_ext,
                  std::uint64_t current_support);

/// Overload where the tested distribution is the current path's own.
inline bool should_prune(const NextStepDistribution& d, int order_ext) {
    return should_prune(d, order_ext, d.support);
}

struct MinerConfig {
    std::uint32_t min_support = 1;
    /// Only used by the exhaustive baseline; absent means unbounded (plus).
    std::optional<int> max_order;
};

struct MinerStats {
    std::uint64_t observations_materialized = 0; // raw n-gram instances stored
    std::uint64_t divergence_tests = 0;
    std::uint64_t prunes_by_bound = 0;
    /// Contexts + count cells + cached positions (+ child links when built
    /// eagerly); the portable memory proxy reported by the bench command.
    std::uint64_t peak_table_entries = 0;
    int max_materialized_order = 0;
};

/// Where an observation sits in the raw data: trajectory ordinal within the
/// window, and the step offset of the context's LAST entity.
struct ObservationPosition {
    std::uint32_t trajectory = 0;
    std::uint32_t offset = 0;
};

/// Lazily built n-gram tables: per-path next-step distributions plus the
/// position index that makes one-step extension a constant-time lookup
/// instead of a scan of the raw data.
class ObservationStore {
public:
    struct Observation {
        NextStepDistribution dist;
        std::vector<ObservationPosition> positions;
        std::vector<ContextPath> children; // populated by build_all_orders only
    };

    explicit ObservationStore(const Window& window) : window_(&window) {}

    /// Eagerly tabulates every first-order observation (with positions).
    std::vector<ContextPath> build_first_order();

    /// Eagerly tabulates every observation of orders 1..max_order, wiring
    /// child links; paths of order >= 2 with support < min_support are
    /// dropped. No position index is kept (the baseline never extends
    /// lazily).
    std::vector<ContextPath> build_all_orders(int max_order, std::uint32_t min_support);

    /// Materializes the order-(k+1) extensions of `path` from its cached
    /// positions: for each position, the entity at offset-k supplies the new
    /// previous step and the entity at offset+1 the next step. Positions at
    /// the start of a trajectory contribute nothing. Returns the extensions
    /// with support >= min_support (others are not stored).
    std::vector<ContextPath> extend_observations(const ContextPath& path,
                                                 std::uint32_t min_support);

    const Observation* find(const ContextPath& path) const;
    const Window& window() const { return *window_; }
    const MinerStats& stats() const { return stats_; }
    MinerStats& stats() { return stats_; }
    std::size_t path_count() const { return table_.size(); }

private:
    Observation& insert_instances(
        const ContextPath& path,
        std::vector<std::pair<EntityId, std::uint64_t>>&& counts,
        std::uint64_t support,
        std::vector<ObservationPosition>&& positions);
    void note_entries(std::int64_t delta);

    const Window* window_;
    std::unordered_map<ContextPath, Observation, ContextPathHash> table_;
    std::int64_t live_entries_ = 0;
    MinerStats stats_;
};

/// Accepted variable-order dependency rules of one window. Every observed
/// first-order path is always present; for each rule of order k >= 2 its
/// order-(k-1) suffix is also present (suffix closure).
class RuleSet {
public:
    using Map = std::unordered_map<ContextPath, NextStepDistribution, ContextPathHash>;

    void add(const ContextPath& context, NextStepDistribution dist);
    bool contains(const ContextPath& context) const;
    const NextStepDistribution* find(const ContextPath& context) const;
    const Map& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }
    int max_order_found() const { return max_order_found_; }
    std::map<int, std::size_t> order_histogram() const; // R_k

    bool operator==(const RuleSet& other) const { return rules_ == other.rules_; }

private:
    Map rules_;
    int max_order_found_ = 0;
};

/// Test/instrumentation hooks; all optional.
struct MinerHooks {
    /// Called when rule growing stops at `path` because the bound test held.
    /// `valid` is the distribution the subtree would have been tested
    /// against.
    std::function<void(const ContextPath& path, const NextStepDistribution& valid,
                       std::uint64_t path_support)>
        on_prune;
};

struct MineResult {
    RuleSet rules;
    MinerStats stats;
};

/// BuildHON+: parameter-free lazy mining. First-order observations are
/// built eagerly; growth materializes deeper orders only on demand and
/// stops early where the divergence upper bound proves no significant
/// extension can exist.
MineResult mine_rules_plus(const Window& window, const MinerConfig& config,
                           const MinerHooks* hooks = nullptr);

/// BuildHON: exhaustive baseline. Materializes every n-gram up to
/// config.max_order (required), then runs the identical acceptance walk
/// without the pruning bound. Produces a RuleSet identical to
/// mine_rules_plus whenever max_order >= its max_order_found.
MineResult mine_rules_baseline(const Window& window, const MinerConfig& config,
                               const MinerHooks* hooks = nullptr);

/// One rule per line: `e1|e2|...|ek -> next:count next:count ...`, contexts
/// oldest-first; contexts and next-steps in lexicographic token order.
void save_rules(const RuleSet& rules, const Vocab& vocab, std::ostream& out);
std::string format_rules(const RuleSet& rules, const Vocab& vocab);

/// Parses the save_rules format, interning tokens into `vocab`.
RuleSet parse_rules(std::istream& in, Vocab& vocab, const std::string& source_name);

} // namespace honad
