#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "confmix/configuration.hpp"

namespace confmix {

/**
 * Sparse weighted digraph over N vertices.
 *
 * Entry (i, j) of the adjacency is the weight of edge i -> j; storage is
 * column-compressed. Weights are raw distances straight out of knn_build()
 * and affinities after reweighting.
 */
class AffinityGraph {
public:
    using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, std::ptrdiff_t>;

    struct Flags {
        bool directed = true;
        bool stochastic = false;
        bool reweighted = false;
        bool symmetrized = false;
    };

    /// Validates: square, no self-loops, weights positive and finite.
    AffinityGraph(Matrix adjacency, Flags flags, std::size_t k = 0, double lambda = 0.0);

    std::size_t n_vertices() const noexcept { return static_cast<std::size_t>(adjacency_.rows()); }
    std::size_t n_edges() const noexcept { return static_cast<std::size_t>(adjacency_.nonZeros()); }
    const Matrix& adjacency() const noexcept { return adjacency_; }
    const Flags& flags() const noexcept { return flags_; }
    bool directed() const noexcept { return flags_.directed; }
    bool stochastic() const noexcept { return flags_.stochastic; }
    /// Neighbors per vertex used to build the graph (0 if not from knn_build).
    std::size_t k() const noexcept { return k_; }
    /// Effective reweighting constant (0 if not reweighted).
    double lambda() const noexcept { return lambda_; }

    /// Column sums (weighted in-degrees).
    std::vector<double> in_degrees() const;
    /// Row sums (weighted out-degrees).
    std::vector<double> out_degrees() const;

private:
    Matrix adjacency_;
    Flags flags_;
    std::size_t k_ = 0;
    double lambda_ = 0.0;
};

/// max(3, ceil(log10 N)).
std::size_t auto_k(std::size_t n_samples);

/// Exact Euclidean kNN digraph; ties broken by lower vertex index.
AffinityGraph knn_build(const FeatureMatrix& x, std::optional<std::size_t> k = std::nullopt);

/// Divides each non-empty column by its sum.
AffinityGraph column_stochastic(const AffinityGraph& g);

struct ReweightParams {
    double lambda = 15.0;
    double bisection_tolerance = 1e-6;
    std::size_t max_iterations = 100;
    double sigma_lo = 1e-6;
    double sigma_hi = 1e6;

    /// Throws UsageError unless lambda >= 1 and the sigma bounds are ordered.
    void validate() const;
};

struct SigmaSolution {
    double sigma = 0.0;
    /// The kernel sum cannot reach lambda inside the sigma bounds.
    bool saturated = false;
    /// Kernel sum at the returned sigma.
    double kernel_sum = 0.0;
};

/// Kernel sum sum_j exp(-d_j^2 / (2 sigma^2)).
double gaussian_kernel_sum(std::span<const double> distances, double sigma);

/// Bisection for sigma such that the kernel sum over `distances` equals lambda.
SigmaSolution solve_sigma(std::span<const double> distances, const ReweightParams& params);

/// Lambda actually used when reweighting a graph with `k` out-edges per vertex.
double effective_lambda(double lambda, std::size_t k);

struct ReweightReport {
    std::vector<double> sigmas;
    std::vector<bool> saturated;
    double lambda = 0.0;
};

/// Replaces raw distances with (1/lambda) exp(-d^2 / (2 sigma_i^2)), sigma_i per source vertex.
AffinityGraph sgtsne_reweight(const AffinityGraph& g, const ReweightParams& params,
                              ReweightReport* report = nullptr);

/// Undirected graph with w'(i,j) = (w(i,j) + w(j,i)) / 2.
AffinityGraph symmetrize(const AffinityGraph& g);

/// Undirected graph on the union support with w'(i,j) = max(w(i,j), w(j,i)).
AffinityGraph symmetrize_union(const AffinityGraph& g);

struct WeightedEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 0.0;
};

/// Undirected affinity graph from an edge list (each edge listed once).
AffinityGraph undirected_graph(std::size_t n_vertices, std::span<const WeightedEdge> edges);

/// Matrix Market coordinate file plus `<path>.json` sidecar.
void save_graph(const AffinityGraph& g, const std::filesystem::path& path);
AffinityGraph load_graph(const std::filesystem::path& path);

} // namespace confmix
