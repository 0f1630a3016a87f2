#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "honad/rule_miner.hpp"

namespace honad {

/// A vertex of the higher-order network: an entity conditioned on the path
/// that led to it. A FON node has an empty context.
struct HonNode {
    std::string entity;
    std::vector<std::string> context; // oldest-first, like ContextPath

    /// Canonical name: `entity|c_{k-1}.c_{k-2}...` (context newest-first,
    /// dot-joined); bare entity when the context is empty.
    std::string name() const;

    bool operator==(const HonNode&) const = default;
    auto operator<=>(const HonNode&) const = default;
};

/// Weighted directed higher-order network. Immutable once built; nodes are
/// unique and every node participates in at least one edge.
class HonGraph {
public:
    struct Edge {
        std::uint32_t src = 0;
        std::uint32_t dst = 0;
        double weight = 0; // transition counts, > 0
    };

    const std::vector<HonNode>& nodes() const { return nodes_; }
    /// Sorted by (source node, target node); at most one edge per pair.
    const std::vector<Edge>& edges() const { return edges_; }
    const HonNode& src(const Edge& e) const { return nodes_[e.src]; }
    const HonNode& dst(const Edge& e) const { return nodes_[e.dst]; }
    double total_weight() const;

    bool operator==(const HonGraph& other) const;

    /// Assembles a graph from (source node, target node, weight) triples,
    /// merging duplicate pairs by weight summation and dropping nodes that
    /// carry no edge.
    static HonGraph from_edges(std::vector<std::tuple<HonNode, HonNode, double>> triples);

private:
    std::vector<HonNode> nodes_; // sorted, unique
    std::vector<Edge> edges_;    // sorted by (src node, dst node)
};

/// Wires an accepted (suffix-closed) RuleSet into a HonGraph. Each rule's
/// flow routes through the most specific accepted context: observations
/// matching a higher-order rule are subtracted from the lower-order rule's
/// edges, so no transition is counted twice. Rule sets with only first-order
/// contexts yield the plain FON.
HonGraph build_graph(const RuleSet& rules, const Vocab& vocab);

/// Union of both node sets, ordered lexicographically by canonical name.
std::vector<HonNode> node_union(const HonGraph& g, const HonGraph& h);

/// One edge per line: `<source-name> <target-name> <weight>`, lines sorted
/// lexicographically.
void save_graph(const HonGraph& graph, std::ostream& out);
std::string format_graph(const HonGraph& graph);

/// Parses the save_graph format.
HonGraph parse_graph(std::istream& in, const std::string& source_name);

} // namespace honad
