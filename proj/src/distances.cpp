#include "honad/distances.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "honad/errors.hpp"

namespace honad {

std::string metric_cli_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::weight: return "weight";
        case MetricKind::mcs_weight: return "mcs";
        case MetricKind::modality: return "modality";
        case MetricKind::entropy: return "entropy";
        case MetricKind::spectral: return "spectral";
    }
    throw InternalError("unknown metric kind");
}

MetricKind parse_metric(const std::string& name) {
    if (name == "weight") return MetricKind::weight;
    if (name == "mcs" || name == "mcs_weight") return MetricKind::mcs_weight;
    if (name == "modality") return MetricKind::modality;
    if (name == "entropy") return MetricKind::entropy;
    if (name == "spectral") return MetricKind::spectral;
    throw ArgumentError("unknown metric '" + name +
                        "' (expected weight|mcs|modality|entropy|spectral)");
}

std::vector<MetricKind> all_metrics() {
    return {MetricKind::weight, MetricKind::mcs_weight, MetricKind::modality,
            MetricKind::entropy, MetricKind::spectral};
}

namespace {

using EdgeKey = std::pair<const HonNode*, const HonNode*>;

struct EdgeKeyLess {
    bool operator()(const EdgeKey& a, const EdgeKey& b) const {
        if (*a.first != *b.first) return *a.first < *b.first;
        return *a.second < *b.second;
    }
};

std::vector<std::pair<EdgeKey, double>> sorted_edges(const HonGraph& g) {
    std::vector<std::pair<EdgeKey, double>> out;
    out.reserve(g.edges().size());
    for (const auto& e : g.edges())
        out.push_back({{&g.src(e), &g.dst(e)}, e.weight});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return EdgeKeyLess{}(a.first, b.first);
    });
    return out;
}

// Walks the union of both sorted edge lists, reporting each edge with its
// weight in g and in h (0 when absent).
template <typename Fn>
void merge_edges(const HonGraph& g, const HonGraph& h, Fn&& fn) {
    auto ge = sorted_edges(g);
    auto he = sorted_edges(h);
    std::size_t i = 0, j = 0;
    while (i < ge.size() || j < he.size()) {
        if (j == he.size() ||
            (i < ge.size() && EdgeKeyLess{}(ge[i].first, he[j].first))) {
            fn(ge[i].second, 0.0);
            ++i;
        } else if (i == ge.size() || EdgeKeyLess{}(he[j].first, ge[i].first)) {
            fn(0.0, he[j].second);
            ++j;
        } else {
            fn(ge[i].second, he[j].second);
            ++i;
            ++j;
        }
    }
}

Eigen::MatrixXd adjacency_on(const HonGraph& g, const std::vector<HonNode>& basis) {
    std::map<HonNode, int> index;
    for (std::size_t i = 0; i < basis.size(); ++i)
        index.emplace(basis[i], static_cast<int>(i));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()),
                                              static_cast<Eigen::Index>(basis.size()));
    for (const auto& e : g.edges())
        a(index.at(g.src(e)), index.at(g.dst(e))) += e.weight;
    return a;
}

} // namespace

double weight_distance(const HonGraph& g, const HonGraph& h) {
    if (g.edges().empty() && h.edges().empty())
        throw UndefinedDistanceError("weight distance undefined: both graphs empty");
    double sum = 0;
    std::size_t union_size = 0;
    merge_edges(g, h, [&](double wg, double wh) {
        sum += std::abs(wg - wh) / std::max(wg, wh);
        ++union_size;
    });
    return sum / static_cast<double>(union_size);
}

double mcs_weight_distance(const HonGraph& g, const HonGraph& h) {
    double sum = 0;
    std::size_t common = 0;
    merge_edges(g, h, [&](double wg, double wh) {
        if (wg > 0 && wh > 0) {
            sum += std::abs(wg - wh) / std::max(wg, wh);
            ++common;
        }
    });
    if (common == 0)
        throw UndefinedDistanceError("MCS weight distance undefined: empty edge "
                                     "intersection");
    return sum / static_cast<double>(common);
}

std::vector<double> perron_vector(const HonGraph& g, const std::vector<HonNode>& basis,
                                  const SpectralParams& params) {
    if (g.edges().empty())
        throw ArgumentError("perron_vector: graph has no edges");
    const Eigen::MatrixXd a = adjacency_on(g, basis);
    const Eigen::Index n = a.rows();

    // Shift by the max row sum: eigenvectors are unchanged, and the Perron
    // root of a + shift*I strictly dominates in modulus even on periodic
    // graphs (where a alone has several eigenvalues on the spectral circle).
    const double shift = a.rowwise().sum().maxCoeff();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    double delta = 0;
    for (int step = 0; step < params.power_iteration_max_steps; ++step) {
        Eigen::VectorXd y = a * x + shift * x;
        y.normalize();
        delta = (y - x).norm();
        x = y;
        if (delta < params.power_iteration_tol) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (x[i] == 0) continue;
                if (x[i] < 0) x = -x;
                break;
            }
            return {x.data(), x.data() + n};
        }
    }
    throw ConvergenceError("power iteration did not converge within " +
                               std::to_string(params.power_iteration_max_steps) +
                               " steps (residual " + std::to_string(delta) + ")",
                           delta);
}

double modality_distance(const HonGraph& g, const HonGraph& h,
                         const SpectralParams& params) {
    if (g.edges().empty() || h.edges().empty())
        throw ArgumentError("modality distance requires at least one edge per graph");
    const std::vector<HonNode> basis = node_union(g, h);
    const std::vector<double> pg = perron_vector(g, basis, params);
    const std::vector<double> ph = perron_vector(h, basis, params);
    double sum = 0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const double d = pg[i] - ph[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double entropy_distance(const HonGraph& g, const HonGraph& h) {
    if (g.edges().empty() || h.edges().empty())
        throw ArgumentError("entropy distance requires at least one edge per graph");
    auto entropy = [](const HonGraph& graph) {
        const double total = graph.total_weight();
        double sum = 0;
        for (const auto& e : graph.edges()) {
            const double w = e.weight / total;
            sum += w - std::log(w);
        }
        return sum;
    };
    return std::abs(entropy(g) - entropy(h));
}

std::vector<double> laplacian_spectrum(const HonGraph& g) {
    const Eigen::Index n = static_cast<Eigen::Index>(g.nodes().size());
    Eigen::MatrixXd a = adjacency_on(g, g.nodes());
    Eigen::MatrixXd s = 0.5 * (a + a.transpose());
    Eigen::MatrixXd lap = Eigen::MatrixXd(s.rowwise().sum().asDiagonal()) - s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap,
                                                          Eigen::EigenvaluesOnly);
    std::vector<double> eigenvalues(solver.eigenvalues().data(),
                                    solver.eigenvalues().data() + n);
    std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
    return eigenvalues;
}

double spectral_distance(const HonGraph& g, const HonGraph& h,
                         const SpectralParams& params) {
    if (g.nodes().empty() || h.nodes().empty())
        throw ArgumentError("spectral distance requires at least one node per graph");
    const int min_nodes =
        static_cast<int>(std::min(g.nodes().size(), h.nodes().size()));
    const int k = params.num_eigenvalues.value_or(min_nodes);
    if (k < 1 || k > min_nodes)
        throw ArgumentError("spectral distance: k must be in [1, min node count]");

    const std::vector<double> lambda = laplacian_spectrum(g);
    const std::vector<double> mu = laplacian_spectrum(h);
    double diff2 = 0, lambda2 = 0, mu2 = 0;
    for (int i = 0; i < k; ++i) {
        diff2 += (lambda[i] - mu[i]) * (lambda[i] - mu[i]);
        lambda2 += lambda[i] * lambda[i];
        mu2 += mu[i] * mu[i];
    }
    const double denom = std::min(lambda2, mu2);
    if (denom == 0)
        throw UndefinedDistanceError("spectral distance undefined: zero spectrum");
    return std::sqrt(diff2 / denom);
}

double compute_distance(MetricKind kind, const HonGraph& g, const HonGraph& h,
                        const SpectralParams& params) {
    switch (kind) {
        case MetricKind::weight: return weight_distance(g, h);
        case MetricKind::mcs_weight: return mcs_weight_distance(g, h);
        case MetricKind::modality: return modality_distance(g, h, params);
        case MetricKind::entropy: return entropy_distance(g, h);
        case MetricKind::spectral: return spectral_distance(g, h, params);
    }
    throw InternalError("unknown metric kind");
}

} // namespace honad
