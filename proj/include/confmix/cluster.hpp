#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "confmix/configuration.hpp"
#include "confmix/graph.hpp"

namespace confmix {

/// Repulsion penalty paired with the attraction term.
///  - cpm: number of within-cluster vertex pairs, sum_k n_k (n_k - 1) / 2
///  - rb_modularity: sum_k vol_k^2 / (2 W)
enum class QualityMode { cpm, rb_modularity };

std::string_view to_string(QualityMode mode);
QualityMode parse_quality_mode(std::string_view text);

struct QualitySpec {
    QualityMode mode = QualityMode::cpm;
    double gamma = 0.0;
};

/// Total weight of edges inside clusters, each undirected edge counted once.
double attraction(const Configuration& omega, const AffinityGraph& g);
double repulsion(const Configuration& omega, const AffinityGraph& g, QualityMode mode);
/// -attraction + gamma * repulsion; lower is better.
double objective(const Configuration& omega, const AffinityGraph& g, double gamma, QualityMode mode);

struct LeidenOptions {
    std::uint64_t seed = 0;
    /// Starting partition; singletons when empty.
    std::optional<Configuration> initial;
    /// Full Leiden passes; stops earlier once a pass leaves the partition unchanged.
    std::size_t max_passes = 50;
};

/// Local minimum of objective(., g, gamma, mode) by Leiden's move / refine / aggregate scheme.
Configuration leiden_at_gamma(const AffinityGraph& g, double gamma, QualityMode mode,
                              const LeidenOptions& options = {});

/// A resolution at and beyond which the all-lonely configuration is optimal.
double front_gamma_max(const AffinityGraph& g, QualityMode mode);

struct FrontEntry {
    Configuration configuration;
    double gamma_star = 0.0;
    double attraction = 0.0;
    double repulsion = 0.0;
    /// Dominance interval [interval_lo, interval_hi).
    double interval_lo = 0.0;
    double interval_hi = 0.0;

    double objective(double gamma) const { return -attraction + gamma * repulsion; }
};

struct BlueRedFront {
    QualityMode mode = QualityMode::cpm;
    double gamma_max = 0.0;
    /// Ascending gamma_star; their intervals tile (0, gamma_max].
    std::vector<FrontEntry> entries;
    Configuration all_in_one{std::vector<Label>{1}};
    Configuration all_lonely{std::vector<Label>{1}};
    /// Leiden invocations spent building the front.
    std::size_t leiden_calls = 0;

    /// Entries other than the all-in-one and all-lonely configurations.
    std::vector<const FrontEntry*> nontrivial() const;
};

struct FrontOptions {
    QualityMode mode = QualityMode::cpm;
    std::uint64_t seed = 0;
    /// Seed one crossing-point run from the coarser neighbour's partition.
    bool warm_start = true;
    /// Additional runs from singletons per crossing, each with its own seed; the lowest objective wins.
    std::size_t restarts = 2;
    std::size_t max_leiden_calls = 20000;
};

/// Lower envelope of the lines gamma -> -A + gamma R discovered by descending triangulation.
BlueRedFront descending_triangulation(const AffinityGraph& g, const FrontOptions& options = {});

/// Line crossing of two (attraction, repulsion) pairs.
double crossing_gamma(double attraction_a, double repulsion_a, double attraction_b, double repulsion_b);

enum class Symmetrization { mean, union_max };

struct ExtractParams {
    std::optional<std::size_t> k;
    bool reweight = true;
    ReweightParams reweight_params;
    Symmetrization symmetrization = Symmetrization::mean;
    FrontOptions front;
};

struct Extraction {
    AffinityGraph graph;
    BlueRedFront front;
    ConfigurationSet configurations;
};

/// Builds the clustering graph: kNN, then reweighting (or column-stochastic), then symmetrization.
AffinityGraph build_clustering_graph(const FeatureMatrix& x, const ExtractParams& params);

/// Front of the pipeline graph; nontrivial entries as a coarse-to-fine ConfigurationSet.
Extraction extract(const FeatureMatrix& x, const ExtractParams& params);
ConfigurationSet extract_configurations(const FeatureMatrix& x, const ExtractParams& params);

/// Coarse-to-fine set from the front's nontrivial entries.
ConfigurationSet front_configurations(const BlueRedFront& front);

/// JSON array of {gamma_star, interval, n_clusters, attraction, repulsion}.
void save_front_json(const BlueRedFront& front, const std::filesystem::path& path);
/// Containment lineage between consecutive levels as a DOT digraph.
void save_lineage_dot(const ConfigurationSet& set, const std::filesystem::path& path);

} // namespace confmix
