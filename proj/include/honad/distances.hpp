#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "honad/hon_graph.hpp"

namespace honad {

enum class MetricKind { weight, mcs_weight, modality, entropy, spectral };

/// CLI spelling: weight | mcs | modality | entropy | spectral.
std::string metric_cli_name(MetricKind kind);
MetricKind parse_metric(const std::string& name);
std::vector<MetricKind> all_metrics();

struct SpectralParams {
    /// Number of top eigenvalues compared; defaults to the smaller node count.
    std::optional<int> num_eigenvalues;
    double power_iteration_tol = 1e-10;
    int power_iteration_max_steps = 10000;
};

/// Eq.-1 style weight distance over the edge union, in [0, 1]. A missing
/// edge counts as weight 0 and contributes a term of exactly 1.
double weight_distance(const HonGraph& g, const HonGraph& h);

/// Same summand restricted to (and normalized by) the edge intersection.
/// Throws UndefinedDistanceError when the intersection is empty.
double mcs_weight_distance(const HonGraph& g, const HonGraph& h);

/// Euclidean distance between the Perron vectors of the two weighted
/// adjacency matrices, aligned on the node union. Computed by shifted power
/// iteration (the shift leaves eigenvectors unchanged and breaks the
/// eigenvalue-modulus ties of periodic graphs); sign fixed so the first
/// nonzero component is positive.
double modality_distance(const HonGraph& g, const HonGraph& h,
                         const SpectralParams& params = {});

/// |E(G) - E(H)| where E sums the normalized edge weights minus their
/// natural logs.
double entropy_distance(const HonGraph& g, const HonGraph& h);

/// Compares the top-k eigenvalues of each graph's symmetrized weighted
/// Laplacian: sqrt(sum (lambda_i - mu_i)^2 / min(sum lambda_i^2, sum mu_i^2)).
double spectral_distance(const HonGraph& g, const HonGraph& h,
                         const SpectralParams& params = {});

double compute_distance(MetricKind kind, const HonGraph& g, const HonGraph& h,
                        const SpectralParams& params = {});

/// Perron vector over an explicit node basis (exposed for oracle tests).
std::vector<double> perron_vector(const HonGraph& g, const std::vector<HonNode>& basis,
                                  const SpectralParams& params = {});

/// Descending eigenvalues of the graph's symmetrized weighted Laplacian.
std::vector<double> laplacian_spectrum(const HonGraph& g);

} // namespace honad
