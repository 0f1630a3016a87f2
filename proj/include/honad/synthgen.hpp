#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace honad {

/// Toroidal page grid: side*side pages labeled 00..(side^2-1) row-major,
/// each with exactly two out-links (right and down, wrapping).
struct GridSpec {
    int side = 10;
    int pages() const { return side * side; }
};

int page_right_of(int page, int side);
int page_down_of(int page, int side);
std::string page_label(int page, int side);

/// A movement bias: when the user's recent path ends with `trigger`
/// (oldest first, current page last), the next move is right with
/// probability p_right, down otherwise.
struct RegimeRule {
    std::vector<int> trigger;
    double p_right = 0.5;
    int order() const { return static_cast<int>(trigger.size()); }
};

struct RegimeTableEntry {
    int regime = 1; // 1..11
    std::vector<RegimeRule> rules;
};

/// The eleven cumulative behavioral regimes, from pure random movement
/// through first-, second-, third-, complementary and mixed-order rules.
/// Rules persist across regimes unless explicitly flipped.
std::vector<RegimeTableEntry> regime_table();

struct ScenarioConfig {
    GridSpec grid;
    int n_users = 1000;
    int steps_per_user = 100;    // moves per user per window
    int windows_per_regime = 10; // total windows = 11 * this
    std::uint64_t seed = 20260809;
};

struct GroundTruth {
    struct Boundary {
        int window = 0;            // first window of the new regime
        std::string anomaly_class; // first | second | third | complementary | mixed
    };
    std::vector<Boundary> boundaries; // 10 entries
};

/// Writes the synthetic corpus (trajectory file format; one line per user
/// per window) and returns the regime-boundary ground truth. Byte-identical
/// output for identical configs: mt19937_64 seeded with config.seed, one
/// draw for the start page (next() % pages) and one per move
/// ((next() >> 11) / 2^53 < p_right), users then windows in order.
GroundTruth generate(const ScenarioConfig& config, const std::filesystem::path& out);
GroundTruth generate(const ScenarioConfig& config, std::ostream& out);

/// Companion file: `<boundary-window> <anomaly-class>` per line.
void save_ground_truth(const GroundTruth& truth, std::ostream& out);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// Regime (1-based) active in a window of the standard 11-regime scenario.
int regime_of_window(int window, int windows_per_regime);

} // namespace honad
