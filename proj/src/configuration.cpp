#include "confmix/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "confmix/error.hpp"

namespace confmix {

FeatureMatrix::FeatureMatrix(std::size_t n_samples, std::size_t n_features, std::vector<double> values)
    : n_samples_(n_samples), n_features_(n_features), values_(std::move(values)) {
    if (n_samples_ < 2) {
        throw DataError("feature matrix needs at least 2 samples, got " + std::to_string(n_samples_));
    }
    if (n_features_ < 1) {
        throw DataError("feature matrix needs at least 1 feature");
    }
    if (values_.size() != n_samples_ * n_features_) {
        throw DataError("feature matrix storage does not match its shape");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DataError("non-finite feature at row " + std::to_string(i / n_features_) + ", column " +
                            std::to_string(i % n_features_));
        }
    }
}

Configuration::Configuration(std::vector<Label> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) {
        throw DataError("configuration must label at least one sample");
    }
    Label max_label = 0;
    for (Label l : labels_) {
        if (l < 1) {
            throw DataError("configuration labels must be positive, got " + std::to_string(l));
        }
        max_label = std::max(max_label, l);
    }
    if (static_cast<std::size_t>(max_label) > labels_.size()) {
        throw DataError("configuration label " + std::to_string(max_label) + " exceeds sample count");
    }
    std::vector<bool> seen(static_cast<std::size_t>(max_label), false);
    for (Label l : labels_) seen[static_cast<std::size_t>(l - 1)] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw DataError("configuration labels are not contiguous in 1.." + std::to_string(max_label));
    }
    n_clusters_ = max_label;
}

std::vector<std::size_t> Configuration::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n_clusters_), 0);
    for (Label l : labels_) ++sizes[static_cast<std::size_t>(l - 1)];
    return sizes;
}

Configuration Configuration::restrict_to(std::span<const std::size_t> indices) const {
    std::vector<Label> sub;
    sub.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= labels_.size()) {
            throw DataError("index " + std::to_string(i) + " out of range for configuration of size " +
                            std::to_string(labels_.size()));
        }
        sub.push_back(labels_[i]);
    }
    return relabel_contiguous(std::span<const Label>(sub));
}

Configuration Configuration::all_in_one(std::size_t n) {
    return Configuration(std::vector<Label>(n, 1));
}

Configuration Configuration::all_lonely(std::size_t n) {
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Label>(i + 1);
    return Configuration(std::move(labels));
}

namespace {

template <typename Id>
Configuration relabel_impl(std::span<const Id> raw) {
    if (raw.empty()) {
        throw DataError("cannot relabel an empty label sequence");
    }
    std::unordered_map<Id, Label> ids;
    std::vector<Label> labels;
    labels.reserve(raw.size());
    for (Id id : raw) {
        auto [it, inserted] = ids.try_emplace(id, static_cast<Label>(ids.size() + 1));
        labels.push_back(it->second);
    }
    return Configuration(std::move(labels));
}

} // namespace

Configuration relabel_contiguous(std::span<const std::int64_t> raw) { return relabel_impl(raw); }
Configuration relabel_contiguous(std::span<const Label> raw) { return relabel_impl(raw); }

Configuration product_partition(const Configuration& a, const Configuration& b) {
    if (a.size() != b.size()) {
        throw AlignmentInputError("product of configurations with " + std::to_string(a.size()) + " and " +
                                  std::to_string(b.size()) + " samples");
    }
    std::vector<std::int64_t> keys(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        keys[i] = static_cast<std::int64_t>(a[i]) * (static_cast<std::int64_t>(b.n_clusters()) + 1) + b[i];
    }
    return relabel_contiguous(std::span<const std::int64_t>(keys));
}

ContingencyTable ContingencyTable::from_counts(
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts) {
    ContingencyTable t;
    t.counts = std::move(counts);
    t.row_sums.assign(static_cast<std::size_t>(t.counts.rows()), 0);
    t.col_sums.assign(static_cast<std::size_t>(t.counts.cols()), 0);
    for (Eigen::Index p = 0; p < t.counts.rows(); ++p) {
        for (Eigen::Index q = 0; q < t.counts.cols(); ++q) {
            const auto c = t.counts(p, q);
            if (c < 0) throw DataError("contingency counts must be non-negative");
            t.row_sums[static_cast<std::size_t>(p)] += c;
            t.col_sums[static_cast<std::size_t>(q)] += c;
            t.total += c;
        }
    }
    return t;
}

ContingencyTable contingency(const Configuration& a, const Configuration& b) {
    if (a.size() != b.size()) {
        throw AlignmentInputError("contingency of configurations with " + std::to_string(a.size()) + " and " +
                                  std::to_string(b.size()) + " samples");
    }
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts =
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(a.n_clusters(), b.n_clusters());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++counts(a[i] - 1, b[i] - 1);
    }
    return ContingencyTable::from_counts(std::move(counts));
}

namespace {

// Exact in 128 bits; only converted to double at the end.
__int128 pairs(std::int64_t n) { return static_cast<__int128>(n) * (n - 1) / 2; }

} // namespace

double ari(const Configuration& a, const Configuration& b) {
    const ContingencyTable t = contingency(a, b);

    __int128 index = 0;
    for (Eigen::Index p = 0; p < t.counts.rows(); ++p) {
        for (Eigen::Index q = 0; q < t.counts.cols(); ++q) index += pairs(t.counts(p, q));
    }
    __int128 sum_a = 0;
    for (auto s : t.row_sums) sum_a += pairs(s);
    __int128 sum_b = 0;
    for (auto s : t.col_sums) sum_b += pairs(s);
    const __int128 total_pairs = pairs(t.total);

    const bool identical = t.rows() == t.cols() && index == sum_a && index == sum_b;
    if (total_pairs == 0) return identical ? 1.0 : 0.0;

    // expected = sum_a * sum_b / total_pairs, so scale everything by total_pairs
    // and the denominator test stays exact.
    const __int128 num = index * total_pairs - sum_a * sum_b;
    const __int128 den = (sum_a + sum_b) * total_pairs - 2 * sum_a * sum_b;
    if (den == 0) return identical ? 1.0 : 0.0;
    return static_cast<double>(2 * static_cast<long double>(num) / static_cast<long double>(den));
}

ConfigurationSet::ConfigurationSet(std::vector<Configuration> configurations, std::vector<double> gammas)
    : configurations_(std::move(configurations)), gammas_(std::move(gammas)) {
    if (configurations_.size() != gammas_.size()) {
        throw DataError("configuration set has " + std::to_string(configurations_.size()) +
                        " configurations but " + std::to_string(gammas_.size()) + " gammas");
    }
    if (configurations_.empty()) return;
    n_samples_ = configurations_.front().size();
    for (std::size_t c = 0; c < configurations_.size(); ++c) {
        if (configurations_[c].size() != n_samples_) {
            throw DataError("configuration " + std::to_string(c) + " has " +
                            std::to_string(configurations_[c].size()) + " samples, expected " +
                            std::to_string(n_samples_));
        }
        if (!std::isfinite(gammas_[c]) || gammas_[c] < 0.0) {
            throw DataError("gamma values must be finite and non-negative");
        }
        if (c > 0) {
            if (!(gammas_[c] > gammas_[c - 1])) throw DataError("gamma values must be strictly ascending");
            if (configurations_[c].n_clusters() < configurations_[c - 1].n_clusters()) {
                throw DataError("configurations must be ordered coarse to fine");
            }
        }
    }
}

} // namespace confmix
