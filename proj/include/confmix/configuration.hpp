#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace confmix {

using Label = std::int32_t;

/// Row-major N x d sample matrix with finite entries.
class FeatureMatrix {
public:
    FeatureMatrix(std::size_t n_samples, std::size_t n_features, std::vector<double> values);

    std::size_t n_samples() const noexcept { return n_samples_; }
    std::size_t n_features() const noexcept { return n_features_; }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * n_features_, n_features_};
    }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_features_ + j]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t n_samples_;
    std::size_t n_features_;
    std::vector<double> values_;
};

/**
 * A hard clustering of N samples with 1-based contiguous labels.
 *
 * Every label in 1..n_clusters() occurs at least once, so n_clusters() is
 * both the number of clusters and the largest label.
 */
class Configuration {
public:
    /// Validates contiguity; use relabel_contiguous() for arbitrary ids.
    explicit Configuration(std::vector<Label> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    Label n_clusters() const noexcept { return n_clusters_; }
    Label operator[](std::size_t i) const { return labels_[i]; }
    const std::vector<Label>& labels() const noexcept { return labels_; }

    /// Cluster sizes indexed by label - 1.
    std::vector<std::size_t> cluster_sizes() const;

    /// The rows of `indices`, relabeled by first appearance.
    Configuration restrict_to(std::span<const std::size_t> indices) const;

    static Configuration all_in_one(std::size_t n);
    static Configuration all_lonely(std::size_t n);

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::vector<Label> labels_;
    Label n_clusters_ = 0;
};

/// Maps arbitrary ids to 1..K in order of first appearance.
Configuration relabel_contiguous(std::span<const std::int64_t> raw);
Configuration relabel_contiguous(std::span<const Label> raw);

/// Intersection (meet) of two partitions of the same samples.
Configuration product_partition(const Configuration& a, const Configuration& b);

/// Cross-tabulation of two configurations; counts(p-1, q-1) = |{i : a_i = p, b_i = q}|.
struct ContingencyTable {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t total = 0;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(counts.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(counts.cols()); }

    /// Builds the derived marginals from a raw count matrix.
    static ContingencyTable from_counts(Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts);
};

ContingencyTable contingency(const Configuration& a, const Configuration& b);

/**
 * Adjusted Rand index (Hubert & Arabie).
 *
 * When the chance-corrected denominator vanishes the result is 1 if the
 * partitions are identical up to relabeling and 0 otherwise.
 */
double ari(const Configuration& a, const Configuration& b);

/// Ordered coarse-to-fine stack of configurations over one sample set.
class ConfigurationSet {
public:
    ConfigurationSet(std::vector<Configuration> configurations, std::vector<double> gammas);

    std::size_t n_samples() const noexcept { return n_samples_; }
    std::size_t size() const noexcept { return configurations_.size(); }
    bool empty() const noexcept { return configurations_.empty(); }
    const Configuration& operator[](std::size_t i) const { return configurations_[i]; }
    const std::vector<Configuration>& configurations() const noexcept { return configurations_; }
    const std::vector<double>& gammas() const noexcept { return gammas_; }

    friend bool operator==(const ConfigurationSet&, const ConfigurationSet&) = default;

private:
    std::size_t n_samples_ = 0;
    std::vector<Configuration> configurations_;
    std::vector<double> gammas_;
};

/// CSV with a `# gammas:` header line and one row of labels per sample.
void save_configuration_set(const ConfigurationSet& set, const std::filesystem::path& path);
ConfigurationSet load_configuration_set(const std::filesystem::path& path);

/// Raw label table in the same CSV layout, without configuration invariants.
struct LabelTable {
    std::vector<double> gammas;
    std::vector<std::vector<Label>> columns;
};
void write_label_table(const LabelTable& table, const std::filesystem::path& path);
LabelTable read_label_table(const std::filesystem::path& path);

} // namespace confmix
