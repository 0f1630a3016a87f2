#include "honad/hon_graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "honad/errors.hpp"
#include "honad/util.hpp"

namespace honad {

std::string HonNode::name() const {
    std::string out = entity;
    if (context.empty()) return out;
    out += '|';
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
        if (it != context.rbegin()) out += '.';
        out += *it;
    }
    return out;
}

double HonGraph::total_weight() const {
    double sum = 0;
    for (const Edge& e : edges_) sum += e.weight;
    return sum;
}

bool HonGraph::operator==(const HonGraph& other) const {
    if (nodes_ != other.nodes_ || edges_.size() != other.edges_.size()) return false;
    for (std::size_t i = 0; i < edges_.size(); ++i)
        if (edges_[i].src != other.edges_[i].src || edges_[i].dst != other.edges_[i].dst ||
            edges_[i].weight != other.edges_[i].weight)
            return false;
    return true;
}

HonGraph HonGraph::from_edges(std::vector<std::tuple<HonNode, HonNode, double>> triples) {
    std::map<std::pair<HonNode, HonNode>, double> merged;
    for (auto& [src, dst, weight] : triples) {
        if (weight <= 0) throw ArgumentError("edge weights must be positive");
        merged[{std::move(src), std::move(dst)}] += weight;
    }
    HonGraph graph;
    std::map<HonNode, std::uint32_t> index;
    for (const auto& [pair, weight] : merged) {
        index.emplace(pair.first, 0);
        index.emplace(pair.second, 0);
    }
    graph.nodes_.reserve(index.size());
    for (auto& [node, idx] : index) {
        idx = static_cast<std::uint32_t>(graph.nodes_.size());
        graph.nodes_.push_back(node);
    }
    graph.edges_.reserve(merged.size());
    for (const auto& [pair, weight] : merged)
        graph.edges_.push_back({index.at(pair.first), index.at(pair.second), weight});
    return graph;
}

namespace {

HonNode node_for_context(const ContextPath& context, const Vocab& vocab) {
    HonNode node;
    node.entity = vocab.token(context.entities.back());
    node.context.reserve(context.entities.size() - 1);
    for (std::size_t i = 0; i + 1 < context.entities.size(); ++i)
        node.context.push_back(vocab.token(context.entities[i]));
    return node;
}

} // namespace

HonGraph build_graph(const RuleSet& rules, const Vocab& vocab) {
    if (rules.size() == 0) throw ArgumentError("build_graph: empty rule set");
    for (const auto& [context, dist] : rules.rules())
        if (context.order() >= 2 && !rules.contains(context.suffix()))
            throw StructuralError("build_graph: rule set is not suffix-closed");

    // Residual flow per rule: whatever is not claimed by an accepted
    // higher-order extension stays with this context.
    std::unordered_map<ContextPath, std::map<EntityId, std::int64_t>, ContextPathHash>
        residual;
    residual.reserve(rules.size());
    for (const auto& [context, dist] : rules.rules()) {
        auto& r = residual[context];
        for (const auto& [entity, count] : dist.counts)
            r[entity] = static_cast<std::int64_t>(count);
    }
    for (const auto& [context, dist] : rules.rules()) {
        if (context.order() < 2) continue;
        auto& parent = residual[context.suffix()];
        for (const auto& [entity, count] : dist.counts) {
            parent[entity] -= static_cast<std::int64_t>(count);
            if (parent[entity] < 0)
                throw StructuralError(
                    "build_graph: extension counts exceed suffix counts");
        }
    }

    std::vector<std::tuple<HonNode, HonNode, double>> triples;
    for (const auto& [context, dist] : rules.rules()) {
        const auto& r = residual[context];
        const HonNode source = node_for_context(context, vocab);
        for (const auto& [next, weight] : r) {
            if (weight <= 0) continue;
            // Longest accepted suffix of the traversed history routes the
            // target at its highest available order; plain entity otherwise.
            HonNode target;
            target.entity = vocab.token(next);
            for (int len = context.order(); len >= 1; --len) {
                ContextPath candidate;
                candidate.entities.assign(context.entities.end() - len,
                                          context.entities.end());
                candidate.entities.push_back(next);
                if (rules.contains(candidate)) {
                    for (std::size_t i = 0; i + 1 < candidate.entities.size(); ++i)
                        target.context.push_back(vocab.token(candidate.entities[i]));
                    break;
                }
            }
            triples.emplace_back(source, target, static_cast<double>(weight));
        }
    }
    return HonGraph::from_edges(std::move(triples));
}

std::vector<HonNode> node_union(const HonGraph& g, const HonGraph& h) {
    std::vector<HonNode> merged = g.nodes();
    merged.insert(merged.end(), h.nodes().begin(), h.nodes().end());
    std::sort(merged.begin(), merged.end(), [](const HonNode& a, const HonNode& b) {
        const std::string an = a.name(), bn = b.name();
        if (an != bn) return an < bn;
        return a < b; // names can collide when tokens contain '.'
    });
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return merged;
}

void save_graph(const HonGraph& graph, std::ostream& out) {
    std::vector<std::string> lines;
    lines.reserve(graph.edges().size());
    for (const auto& edge : graph.edges())
        lines.push_back(graph.src(edge).name() + ' ' + graph.dst(edge).name() + ' ' +
                        format_double(edge.weight));
    std::sort(lines.begin(), lines.end());
    for (const auto& line : lines) out << line << '\n';
}

std::string format_graph(const HonGraph& graph) {
    std::ostringstream out;
    save_graph(graph, out);
    return out.str();
}

namespace {

HonNode parse_node_name(std::string_view name) {
    HonNode node;
    std::size_t bar = name.find('|');
    node.entity = std::string(name.substr(0, bar));
    if (bar != std::string_view::npos) {
        std::string_view rest = name.substr(bar + 1);
        std::vector<std::string> newest_first;
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t dot = rest.find('.', start);
            newest_first.emplace_back(
                rest.substr(start, dot == std::string_view::npos ? dot : dot - start));
            if (dot == std::string_view::npos) break;
            start = dot + 1;
        }
        node.context.assign(newest_first.rbegin(), newest_first.rend());
    }
    return node;
}

} // namespace

HonGraph parse_graph(std::istream& in, const std::string& source_name) {
    std::vector<std::tuple<HonNode, HonNode, double>> triples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        auto where = source_name + ":" + std::to_string(line_no);
        if (fields.size() != 3)
            throw ParseError(where + ": expected `<source> <target> <weight>`");
        double weight = parse_double(fields[2], where + ": weight");
        if (weight <= 0) throw ParseError(where + ": weight must be positive");
        triples.emplace_back(parse_node_name(fields[0]), parse_node_name(fields[1]),
                             weight);
    }
    return HonGraph::from_edges(std::move(triples));
}

} // namespace honad
