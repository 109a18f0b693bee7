#include "confmix/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "confmix/error.hpp"
#include "confmix/parallel.hpp"

namespace confmix {

AffinityGraph::AffinityGraph(Matrix adjacency, Flags flags, std::size_t k, double lambda)
    : adjacency_(std::move(adjacency)), flags_(flags), k_(k), lambda_(lambda) {
    if (adjacency_.rows() != adjacency_.cols()) {
        throw DataError("adjacency matrix must be square");
    }
    adjacency_.makeCompressed();
    for (Eigen::Index j = 0; j < adjacency_.outerSize(); ++j) {
        for (Matrix::InnerIterator it(adjacency_, j); it; ++it) {
            if (it.row() == it.col()) {
                throw DataError(fmt::format("self-loop on vertex {}", j));
            }
            if (!(it.value() > 0.0) || !std::isfinite(it.value())) {
                throw DataError(fmt::format("edge {}->{} has invalid weight {}", it.row(), it.col(), it.value()));
            }
        }
    }
}

std::vector<double> AffinityGraph::in_degrees() const {
    std::vector<double> deg(n_vertices(), 0.0);
    for (Eigen::Index j = 0; j < adjacency_.outerSize(); ++j) {
        for (Matrix::InnerIterator it(adjacency_, j); it; ++it) deg[static_cast<std::size_t>(j)] += it.value();
    }
    return deg;
}

std::vector<double> AffinityGraph::out_degrees() const {
    std::vector<double> deg(n_vertices(), 0.0);
    for (Eigen::Index j = 0; j < adjacency_.outerSize(); ++j) {
        for (Matrix::InnerIterator it(adjacency_, j); it; ++it) deg[static_cast<std::size_t>(it.row())] += it.value();
    }
    return deg;
}

std::size_t auto_k(std::size_t n_samples) {
    // ceil(log10 N) computed on integers so exact powers of ten stay exact.
    std::size_t digits = 0;
    for (std::size_t p = 1; p < n_samples; p *= 10) ++digits;
    return std::max<std::size_t>(3, digits);
}

AffinityGraph knn_build(const FeatureMatrix& x, std::optional<std::size_t> k_opt) {
    const std::size_t n = x.n_samples();
    const std::size_t d = x.n_features();
    const std::size_t k = k_opt.value_or(auto_k(n));
    if (k < 1 || k >= n) {
        throw DataError(fmt::format("k = {} must satisfy 1 <= k < N = {}", k, n));
    }

    std::vector<std::pair<double, std::ptrdiff_t>> neighbors(n * k);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::ptrdiff_t>> dist;
        dist.reserve(n - 1);
        const auto xi = x.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto xj = x.row(j);
            double s = 0.0;
            for (std::size_t f = 0; f < d; ++f) {
                const double diff = xi[f] - xj[f];
                s += diff * diff;
            }
            dist.emplace_back(s, static_cast<std::ptrdiff_t>(j));
        }
        // pair ordering is (distance, index): ties go to the lower index
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t t = 0; t < k; ++t) {
            neighbors[i * k + t] = {std::sqrt(dist[t].first), dist[t].second};
        }
    });

    std::vector<Eigen::Triplet<double, std::ptrdiff_t>> triplets;
    triplets.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            const auto [dist, j] = neighbors[i * k + t];
            if (!(dist > 0.0)) {
                throw DataError(fmt::format("samples {} and {} coincide; kNN distances must be positive", i, j));
            }
            triplets.emplace_back(static_cast<std::ptrdiff_t>(i), j, dist);
        }
    }
    AffinityGraph::Matrix adjacency(static_cast<std::ptrdiff_t>(n), static_cast<std::ptrdiff_t>(n));
    adjacency.setFromTriplets(triplets.begin(), triplets.end());
    return AffinityGraph(std::move(adjacency), {}, k);
}

AffinityGraph column_stochastic(const AffinityGraph& g) {
    AffinityGraph::Matrix a = g.adjacency();
    for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
        double sum = 0.0;
        for (AffinityGraph::Matrix::InnerIterator it(a, j); it; ++it) sum += it.value();
        if (sum == 0.0) continue;
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            throw NumericalError(fmt::format("column {} cannot be normalized (sum {})", j, sum));
        }
        for (AffinityGraph::Matrix::InnerIterator it(a, j); it; ++it) it.valueRef() /= sum;
    }
    auto flags = g.flags();
    flags.stochastic = true;
    return AffinityGraph(std::move(a), flags, g.k(), g.lambda());
}

void ReweightParams::validate() const {
    if (!(lambda >= 1.0) || !std::isfinite(lambda)) {
        throw UsageError(fmt::format("lambda must be >= 1, got {}", lambda));
    }
    if (!(sigma_lo > 0.0) || !(sigma_hi > sigma_lo)) {
        throw UsageError("sigma bounds must satisfy 0 < lo < hi");
    }
    if (!(bisection_tolerance > 0.0)) {
        throw UsageError("bisection tolerance must be positive");
    }
}

double gaussian_kernel_sum(std::span<const double> distances, double sigma) {
    const double scale = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (double dist : distances) sum += std::exp(-dist * dist * scale);
    return sum;
}

SigmaSolution solve_sigma(std::span<const double> distances, const ReweightParams& params) {
    if (distances.empty()) throw DataError("solve_sigma needs at least one distance");
    for (double dist : distances) {
        if (!(dist > 0.0) || !std::isfinite(dist)) {
            throw DataError(fmt::format("solve_sigma: distance {} is not positive", dist));
        }
    }
    if (!(params.lambda > 0.0)) throw DataError("solve_sigma: lambda must be positive");
    if (!(params.sigma_lo > 0.0) || !(params.sigma_hi > params.sigma_lo)) {
        throw DataError("solve_sigma: invalid sigma bounds");
    }

    const double target = params.lambda;
    const double sum_hi = gaussian_kernel_sum(distances, params.sigma_hi);
    if (sum_hi < target - params.bisection_tolerance) {
        return {params.sigma_hi, true, sum_hi};
    }
    const double sum_lo = gaussian_kernel_sum(distances, params.sigma_lo);
    if (sum_lo > target + params.bisection_tolerance) {
        return {params.sigma_lo, true, sum_lo};
    }

    // The sum is increasing in sigma; bisect in log space since the bounds span decades.
    double lo = std::log(params.sigma_lo);
    double hi = std::log(params.sigma_hi);
    double sigma = params.sigma_hi;
    double sum = sum_hi;
    for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
        const double mid = 0.5 * (lo + hi);
        sigma = std::exp(mid);
        sum = gaussian_kernel_sum(distances, sigma);
        if (std::abs(sum - target) <= params.bisection_tolerance) return {sigma, false, sum};
        if (sum < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw NumericalError(fmt::format("sigma bisection did not reach tolerance {} in {} iterations (residual {})",
                                     params.bisection_tolerance, params.max_iterations, sum - target));
}

double effective_lambda(double lambda, std::size_t k) {
    if (k >= 2 && lambda > static_cast<double>(k - 1)) return static_cast<double>(k - 1);
    return lambda;
}

AffinityGraph sgtsne_reweight(const AffinityGraph& g, const ReweightParams& params, ReweightReport* report) {
    params.validate();
    if (g.flags().reweighted || g.flags().symmetrized || g.stochastic()) {
        throw DataError("sgtsne_reweight expects the raw-distance graph from knn_build");
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> rows = g.adjacency();
    rows.makeCompressed();

    std::size_t max_degree = 0;
    for (Eigen::Index i = 0; i < rows.outerSize(); ++i) {
        max_degree = std::max(max_degree, static_cast<std::size_t>(rows.outerIndexPtr()[i + 1] - rows.outerIndexPtr()[i]));
    }
    const std::size_t k = g.k() ? g.k() : max_degree;
    ReweightParams effective = params;
    effective.lambda = effective_lambda(params.lambda, k);
    if (effective.lambda != params.lambda) {
        spdlog::warn("lambda = {} is unreachable with k = {} neighbors; using lambda = {}", params.lambda, k,
                     effective.lambda);
    }

    const std::size_t n = g.n_vertices();
    std::vector<double> sigmas(n, 0.0);
    std::vector<char> saturated(n, 0);
    double* values = rows.valuePtr();
    const auto* outer = rows.outerIndexPtr();
    parallel_for(n, [&](std::size_t i) {
        const auto begin = outer[i];
        const auto end = outer[i + 1];
        if (begin == end) return;
        const std::span<const double> dist(values + begin, static_cast<std::size_t>(end - begin));
        const SigmaSolution sol = solve_sigma(dist, effective);
        sigmas[i] = sol.sigma;
        saturated[i] = sol.saturated;
        if (sol.saturated) {
            const double uniform = 1.0 / static_cast<double>(end - begin);
            for (auto p = begin; p < end; ++p) values[p] = uniform;
            return;
        }
        const double scale = 1.0 / (2.0 * sol.sigma * sol.sigma);
        for (auto p = begin; p < end; ++p) {
            const double w = std::exp(-values[p] * values[p] * scale) / effective.lambda;
            // far neighbours may underflow; keep the edge with the smallest normal weight
            values[p] = std::max(w, std::numeric_limits<double>::min());
        }
    });
    const auto n_saturated = std::count(saturated.begin(), saturated.end(), 1);
    if (n_saturated > 0) {
        spdlog::warn("{} of {} vertices saturated during sigma bisection; given uniform weights", n_saturated, n);
    }
    if (report) {
        report->sigmas = std::move(sigmas);
        report->saturated.assign(saturated.begin(), saturated.end());
        report->lambda = effective.lambda;
    }

    auto flags = g.flags();
    flags.reweighted = true;
    return AffinityGraph(AffinityGraph::Matrix(rows), flags, g.k(), effective.lambda);
}

AffinityGraph symmetrize(const AffinityGraph& g) {
    const AffinityGraph::Matrix& a = g.adjacency();
    AffinityGraph::Matrix at = a.transpose();
    AffinityGraph::Matrix s = 0.5 * (a + at);
    s.prune(0.0);
    auto flags = g.flags();
    flags.directed = false;
    flags.symmetrized = true;
    flags.stochastic = false;
    return AffinityGraph(std::move(s), flags, g.k(), g.lambda());
}

AffinityGraph symmetrize_union(const AffinityGraph& g) {
    const AffinityGraph::Matrix& a = g.adjacency();
    AffinityGraph::Matrix at = a.transpose();
    AffinityGraph::Matrix s = a.cwiseMax(at);
    s.prune(0.0);
    auto flags = g.flags();
    flags.directed = false;
    flags.symmetrized = true;
    flags.stochastic = false;
    return AffinityGraph(std::move(s), flags, g.k(), g.lambda());
}

AffinityGraph undirected_graph(std::size_t n_vertices, std::span<const WeightedEdge> edges) {
    std::vector<Eigen::Triplet<double, std::ptrdiff_t>> triplets;
    triplets.reserve(2 * edges.size());
    for (const auto& e : edges) {
        if (e.u >= n_vertices || e.v >= n_vertices) {
            throw DataError(fmt::format("edge {}-{} out of range for {} vertices", e.u, e.v, n_vertices));
        }
        triplets.emplace_back(static_cast<std::ptrdiff_t>(e.u), static_cast<std::ptrdiff_t>(e.v), e.weight);
        triplets.emplace_back(static_cast<std::ptrdiff_t>(e.v), static_cast<std::ptrdiff_t>(e.u), e.weight);
    }
    const auto n = static_cast<std::ptrdiff_t>(n_vertices);
    AffinityGraph::Matrix adjacency(n, n);
    adjacency.setFromTriplets(triplets.begin(), triplets.end());
    AffinityGraph::Flags flags;
    flags.directed = false;
    flags.symmetrized = true;
    return AffinityGraph(std::move(adjacency), flags);
}

} // namespace confmix
