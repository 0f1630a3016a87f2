#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "honad/corpus.hpp"
#include "honad/errors.hpp"
#include "honad/synthgen.hpp"
#include "tally.hpp"

using namespace honad;

TEST_CASE("regime table pins the eleven cumulative rule sets") {
    auto table = regime_table();
    REQUIRE(table.size() == 11);
    CHECK(table[0].rules.empty());

    auto find_rule = [](const RegimeTableEntry& entry, const std::vector<int>& trigger) {
        for (const auto& rule : entry.rules)
            if (rule.trigger == trigger) return rule.p_right;
        return -1.0;
    };

    CHECK(find_rule(table[1], {0}) == 0.9);
    CHECK(find_rule(table[1], {3}) == 0.9);
    CHECK(find_rule(table[1], {6}) == 0.9);
    CHECK(find_rule(table[2], {0}) == 0.1);
    CHECK(find_rule(table[3], {27, 28}) == 0.9);
    CHECK(find_rule(table[4], {30, 31}) == 0.9);
    CHECK(find_rule(table[4], {21, 31}) == 0.1);
    CHECK(find_rule(table[5], {30, 31}) == 0.1);
    CHECK(find_rule(table[5], {21, 31}) == 0.9);
    CHECK(find_rule(table[6], {61, 71, 81}) == 0.9);
    CHECK(find_rule(table[7], {64, 74, 84}) == 0.9);
    CHECK(find_rule(table[7], {73, 74, 84}) == 0.1);
    CHECK(find_rule(table[8], {64, 74, 84}) == 0.1);
    CHECK(find_rule(table[9], {39, 49, 59}) == 0.9);
    CHECK(find_rule(table[9], {59}) == doctest::Approx(11.0 / 30.0));
    CHECK(find_rule(table[10], {39, 49, 59}) == 0.1);
    CHECK(find_rule(table[10], {59}) == doctest::Approx(19.0 / 30.0));

    // earlier rules persist: the second-order rule from regime 4 is still
    // active in regime 11
    CHECK(find_rule(table[10], {27, 28}) == 0.9);
    CHECK(find_rule(table[10], {0}) == 0.1);
}

TEST_CASE("grid moves wrap on both axes") {
    CHECK(page_right_of(0, 10) == 1);
    CHECK(page_right_of(9, 10) == 0);
    CHECK(page_right_of(99, 10) == 90);
    CHECK(page_down_of(0, 10) == 10);
    CHECK(page_down_of(95, 10) == 5);
    CHECK(page_label(0, 10) == "00");
    CHECK(page_label(99, 10) == "99");
}

TEST_CASE("generation is deterministic and matches the corpus format") {
    ScenarioConfig config;
    config.n_users = 5;
    config.steps_per_user = 8;
    config.windows_per_regime = 1;
    config.seed = 99;

    std::ostringstream a, b;
    GroundTruth truth = generate(config, a);
    generate(config, b);
    CHECK(a.str() == b.str());

    config.seed = 100;
    std::ostringstream c;
    generate(config, c);
    CHECK(a.str() != c.str());

    REQUIRE(truth.boundaries.size() == 10);
    CHECK(truth.boundaries[0].window == 2);
    CHECK(truth.boundaries[0].anomaly_class == "first");
    CHECK(truth.boundaries[2].anomaly_class == "second");
    CHECK(truth.boundaries[3].anomaly_class == "complementary");
    CHECK(truth.boundaries[5].anomaly_class == "third");
    CHECK(truth.boundaries[9].anomaly_class == "mixed");

    std::istringstream in(a.str());
    Corpus corpus = parse_corpus(in, false, "generated");
    CHECK(corpus.windows.size() == 11);
    CHECK(corpus.windows[0].trajectories.size() == 5);
    CHECK(corpus.windows[0].trajectories[0].steps.size() == 9); // steps + 1
    CHECK(corpus.stats.total_steps == 11ull * 5 * 9);
}

TEST_CASE("non-square scenarios are rejected") {
    ScenarioConfig config;
    config.grid.side = 7;
    std::ostringstream out;
    CHECK_THROWS_AS(generate(config, out), ArgumentError);
}

TEST_CASE("empirical frequencies track the configured rules") {
    ScenarioConfig config;
    config.n_users = 400;
    config.steps_per_user = 60;
    config.windows_per_regime = 2;
    config.seed = 5;
    std::ostringstream out;
    generate(config, out);
    std::istringstream in(out.str());
    Corpus corpus = parse_corpus(in, false, "generated");
    auto table = regime_table();
    auto tallies = tally::replay(corpus, config.windows_per_regime, config.grid.side);

    // every rule's conditional frequency within 3 binomial standard errors
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (const auto& rule : table[r].rules) {
            const auto it = tallies[r].by_rule.find(rule.trigger);
            REQUIRE_MESSAGE(it != tallies[r].by_rule.end(),
                            "rule never triggered in regime " << (r + 1));
            const double n = it->second.n();
            const double p_hat = it->second.p_right();
            const double se = std::sqrt(rule.p_right * (1 - rule.p_right) / n);
            CHECK_MESSAGE(std::abs(p_hat - rule.p_right) <= 3 * se + 1e-12,
                          "regime " << (r + 1) << " p_hat " << p_hat << " expected "
                                    << rule.p_right << " n " << n);
        }
    }

    // complementary regimes keep the aggregate first-order split at 1/2
    auto check_page = [&](int regime, int page) {
        const auto& counts = tallies[regime - 1].by_page.at(page);
        const double p_hat = counts.p_right();
        const double se = std::sqrt(0.25 / counts.n());
        CHECK_MESSAGE(std::abs(p_hat - 0.5) <= 3 * se,
                      "regime " << regime << " page " << page << " split " << p_hat);
    };
    for (int regime : {5, 6}) {
        check_page(regime, 31);
        check_page(regime, 35);
    }
    for (int regime : {8, 9}) {
        check_page(regime, 84);
        check_page(regime, 87);
    }
    for (int regime : {10, 11}) check_page(regime, 59);
}

TEST_CASE("ground truth files round-trip") {
    GroundTruth truth;
    truth.boundaries = {{11, "first"}, {21, "complementary"}};
    std::ostringstream out;
    save_ground_truth(truth, out);

    auto path = std::filesystem::temp_directory_path() / "honad_truth.txt";
    {
        std::ofstream file(path);
        file << out.str();
    }
    GroundTruth parsed = load_ground_truth(path);
    REQUIRE(parsed.boundaries.size() == 2);
    CHECK(parsed.boundaries[0].window == 11);
    CHECK(parsed.boundaries[1].anomaly_class == "complementary");
    std::filesystem::remove(path);
}
