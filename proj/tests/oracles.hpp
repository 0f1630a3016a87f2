// Test-only independent oracles: brute-force n-gram tabulation over raw
// trajectories, and a dense eigensolver route to Perron vectors. These must
// stay independent of the implementation paths they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "honad/corpus.hpp"
#include "honad/hon_graph.hpp"
#include "honad/rule_miner.hpp"

namespace oracles {

/// Builds a one-window corpus from whitespace-separated trajectories.
inline honad::Corpus corpus_from_trajectories(
    const std::vector<std::string>& trajectories) {
    std::ostringstream text;
    for (std::size_t i = 0; i < trajectories.size(); ++i)
        text << "1 t" << i << ' ' << trajectories[i] << '\n';
    std::istringstream in(text.str());
    return honad::parse_corpus(in, false, "inline");
}

struct BruteObservation {
    std::vector<std::pair<honad::EntityId, std::uint64_t>> counts; // sorted
    std::uint64_t support = 0;

    honad::NextStepDistribution to_distribution() const {
        return honad::NextStepDistribution{counts, support};
    }
};

/// Exhaustive n-gram scan of the raw window, orders 1..max_order: for every
/// offset with a next step, every context ending there is tabulated.
inline std::map<honad::ContextPath, BruteObservation> brute_ngram_table(
    const honad::Window& window, int max_order) {
    std::map<honad::ContextPath, BruteObservation> table;
    for (const auto& traj : window.trajectories) {
        const auto& steps = traj.steps;
        for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
            const int deepest = std::min<int>(max_order, static_cast<int>(i) + 1);
            for (int k = 1; k <= deepest; ++k) {
                honad::ContextPath path{
                    {steps.begin() + (i + 1 - k), steps.begin() + (i + 1)}};
                BruteObservation& obs = table[path];
                bool found = false;
                for (auto& [entity, count] : obs.counts)
                    if (entity == steps[i + 1]) {
                        ++count;
                        found = true;
                        break;
                    }
                if (!found) obs.counts.emplace_back(steps[i + 1], 1);
                ++obs.support;
            }
        }
    }
    for (auto& [path, obs] : table) std::sort(obs.counts.begin(), obs.counts.end());
    return table;
}

/// Longest trajectory length minus one: no observed context can be deeper.
inline int deepest_possible_order(const honad::Window& window) {
    std::size_t longest = 0;
    for (const auto& traj : window.trajectories)
        longest = std::max(longest, traj.steps.size());
    return longest < 2 ? 0 : static_cast<int>(longest) - 1;
}

/// Perron vector via dense eigendecomposition (independent of the power
/// iteration in the library): eigenvector of the eigenvalue with the
/// largest real part, real-projected, L2-normalized, first nonzero positive.
inline std::vector<double> dense_perron_vector(const honad::HonGraph& g,
                                               const std::vector<honad::HonNode>& basis) {
    std::map<honad::HonNode, int> index;
    for (std::size_t i = 0; i < basis.size(); ++i)
        index.emplace(basis[i], static_cast<int>(i));
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges())
        a(index.at(g.src(e)), index.at(g.dst(e))) += e.weight;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(a);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
        if (solver.eigenvalues()[i].real() > solver.eigenvalues()[best].real())
            best = i;
    Eigen::VectorXd v = solver.eigenvectors().col(best).real();
    v.normalize();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (v[i] == 0) continue;
        if (v[i] < 0) v = -v;
        break;
    }
    return {v.data(), v.data() + n};
}

/// Strongly connected random weighted digraph: a Hamiltonian cycle backbone
/// plus extra random edges, weights in [0.5, 5].
inline honad::HonGraph random_strongly_connected_graph(std::mt19937_64& rng, int n,
                                                       double extra_edge_prob) {
    std::vector<honad::HonNode> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({"n" + std::to_string(i), {}});
    auto weight = [&] {
        return 0.5 + 4.5 * (static_cast<double>(rng() >> 11) / 9007199254740992.0);
    };
    std::vector<std::tuple<honad::HonNode, honad::HonNode, double>> triples;
    for (int i = 0; i < n; ++i)
        triples.emplace_back(nodes[i], nodes[(i + 1) % n], weight());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || j == (i + 1) % n) continue;
            if (static_cast<double>(rng() >> 11) / 9007199254740992.0 < extra_edge_prob)
                triples.emplace_back(nodes[i], nodes[j], weight());
        }
    return honad::HonGraph::from_edges(std::move(triples));
}

} // namespace oracles
