#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "confmix/configuration.hpp"

namespace confmix {

struct LabeledDataset {
    FeatureMatrix features;
    std::optional<Configuration> labels;
    std::string name;

    LabeledDataset(FeatureMatrix features, std::optional<Configuration> labels, std::string name);
};

/// Two interleaving half circles; the first n/2 samples form the outer moon (label 1).
LabeledDataset make_moons(std::size_t n, double noise, std::uint64_t seed);

/// Isotropic Gaussian blobs with per-center counts differing by at most one.
LabeledDataset make_blobs(std::size_t n, const std::vector<std::vector<double>>& centers,
                          const std::vector<double>& stds, std::uint64_t seed);

/// Gaussian blobs with an explicit sample count per center.
LabeledDataset make_blobs(const std::vector<std::size_t>& counts, const std::vector<std::vector<double>>& centers,
                          const std::vector<double>& stds, std::uint64_t seed);

/**
 * Three blobs on a line where no single resolution separates all of them.
 *
 * A large blob (60 samples), a small tight one 2.2 to its right (10) and a
 * wider one 3.6 further on (14). Clustered with k = blobs3_preset_k, the
 * front holds {large+small | wide} and {large | small+wide} but not the
 * ground truth, which is their product.
 */
LabeledDataset make_blobs_preset(std::uint64_t seed);
inline constexpr std::size_t blobs3_preset_k = 20;

/// Concentric circles of radius 1 (label 1) and `factor` (label 2).
LabeledDataset make_circles(std::size_t n, double noise, double factor, std::uint64_t seed);

/// Dense blob next to a sparse one, for degree-skew checks.
LabeledDataset make_density_pair(std::size_t n, std::uint64_t seed);

/// Sliding-window k-mer counts of length 4^k; windows containing non-ACGT characters are skipped.
std::vector<std::uint32_t> kmer_counts(std::string_view sequence, std::size_t k);

struct FastaRecord {
    std::string header;
    std::string sequence;
};
std::vector<FastaRecord> read_fasta(const std::filesystem::path& path);

/// One row of k-mer counts per FASTA record.
FeatureMatrix kmer_matrix(const std::vector<FastaRecord>& records, std::size_t k);

struct CsvOptions {
    bool has_header = false;
    /// 0-based column holding integer ground-truth labels.
    std::optional<std::size_t> label_column;
};

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
/// Features then, if present, the labels as the last column.
void save_csv(const LabeledDataset& data, const std::filesystem::path& path, bool header = false);

/// Per-feature (x - median) / IQR; features with zero IQR are only centered.
struct RobustScaler {
    std::vector<double> median;
    std::vector<double> scale;

    static RobustScaler fit(const FeatureMatrix& x);
    FeatureMatrix transform(const FeatureMatrix& x) const;
    nlohmann::json to_json() const;
    static RobustScaler from_json(const nlohmann::json& j);
};

/// Keeps features whose training variance exceeds the threshold.
struct VarianceThreshold {
    double threshold = 0.0;
    std::vector<std::size_t> kept;

    static VarianceThreshold fit(const FeatureMatrix& x, double threshold = 0.0);
    FeatureMatrix transform(const FeatureMatrix& x) const;
    nlohmann::json to_json() const;
    static VarianceThreshold from_json(const nlohmann::json& j);
};

/// Keeps the `count` highest-variance features, in original column order.
struct TopVarianceSelector {
    std::vector<std::size_t> kept;

    static TopVarianceSelector fit(const FeatureMatrix& x, std::size_t count = 1000);
    FeatureMatrix transform(const FeatureMatrix& x) const;
    nlohmann::json to_json() const;
    static TopVarianceSelector from_json(const nlohmann::json& j);
};

} // namespace confmix
