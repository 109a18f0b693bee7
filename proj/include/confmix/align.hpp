#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "confmix/configuration.hpp"

namespace confmix {

struct ScoreParams {
    double theta = 0.1;
};

/// ARI penalized by the relative difference in cluster counts:
/// ari(a, b) - theta * |(|a| - |b|) / (|a| + |b|)|.
double score(const Configuration& a, const Configuration& b, double theta = ScoreParams{}.theta);

/// L = D - [[C C^T, C], [C^T, C^T C]] over the rows then columns of C.
struct TwoWalkLaplacian {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd degree;

    std::size_t size() const noexcept { return rows + cols; }
};

TwoWalkLaplacian two_walk_laplacian(const ContingencyTable& c);

struct FiedlerResult {
    /// Unit norm, orthogonal to the ones vector, first non-negligible entry positive.
    Eigen::VectorXd vector;
    double eigenvalue = 0.0;
    /// Connected components of the underlying graph. When > 1 the vector is the
    /// null-space vector separating the component of vertex 0 from the rest.
    std::size_t n_components = 1;

    bool disconnected() const noexcept { return n_components > 1; }
};

/// Eigenvector of the smallest eigenvalue above 1e-9 * ||L|| of a graph Laplacian.
FiedlerResult fiedler_vector(const Eigen::MatrixXd& laplacian);
FiedlerResult fiedler_vector(const TwoWalkLaplacian& laplacian);

/// Relabeling of a configuration `b` into the label space of a reference `a`.
struct AlignmentMapping {
    /// target[k - 1] is the reference label assigned to source label k.
    std::vector<Label> target;
    /// One-to-one (reference label, source label) pairs carrying the most shared mass.
    std::vector<std::pair<Label, Label>> pairs;

    struct Merge {
        Label into = 0;
        std::vector<Label> sources;
    };
    struct Split {
        Label source = 0;
        std::vector<Label> into;
    };
    /// Several source labels mapped onto one reference label.
    std::vector<Merge> merges;
    /// A source cluster covering several reference clusters; only the first keeps it.
    std::vector<Split> splits;
    /// Source labels with no counterpart, given labels past the reference range.
    std::vector<Label> fresh;
    double score = 0.0;

    Label operator()(Label source) const { return target.at(static_cast<std::size_t>(source - 1)); }
    std::vector<Label> apply(std::span<const Label> labels) const;
    /// Shared mass of the one-to-one pairs under `c` (rows reference, columns source).
    std::int64_t assignment_mass(const ContingencyTable& c) const;
};

/// Spectral reverse merge & split mapping from a contingency table (rows: reference labels).
AlignmentMapping rms_mapping(const ContingencyTable& c);

/// Maps b's labels onto a's via the two-walk Laplacian ordering.
AlignmentMapping pair_mapping(const Configuration& a, const Configuration& b, double theta = ScoreParams{}.theta);

/// Maximum-mass one-to-one assignment on a rectangular profit matrix.
struct Assignment {
    /// row_to_col[r] is the assigned column or -1.
    std::vector<std::ptrdiff_t> row_to_col;
    double value = 0.0;
};
Assignment max_assignment(const Eigen::MatrixXd& profit);

/// Optimal assignment on C; surplus columns go to their largest row.
AlignmentMapping hungarian_mapping(const ContingencyTable& c);

/// Carried training samples used to score configuration pairs.
struct AnchorSet {
    /// Strictly increasing rows of the train set.
    std::vector<std::size_t> indices;
    /// Rows of the same samples in the test set; empty means identical to `indices`.
    std::vector<std::size_t> test_indices;
    double fraction = 0.001;
    std::uint64_t seed = 0;

    const std::vector<std::size_t>& test_rows() const { return test_indices.empty() ? indices : test_indices; }
    std::size_t size() const noexcept { return indices.size(); }
};

/// max(min_count, floor(fraction * n)) anchors (capped at n), uniform without replacement.
AnchorSet select_anchors(std::size_t n, double fraction = 0.001, std::uint64_t seed = 0, std::size_t min_count = 10);

void save_anchors(const AnchorSet& anchors, const std::filesystem::path& path);
AnchorSet load_anchors(const std::filesystem::path& path);

struct ColumnPair {
    std::size_t train_col = 0;
    std::size_t test_col = 0;
    double score = 0.0;
};

struct RmsAlignment {
    /// Matched test columns in train order (train gammas, train label space),
    /// followed by surplus test columns left unaligned.
    LabelTable aligned;
    std::vector<ColumnPair> pairs;
    /// mappings[p] belongs to pairs[p].
    std::vector<AlignmentMapping> mappings;
    /// Test columns with no train partner, in the order appended to `aligned`.
    std::vector<std::size_t> surplus;
};

/// Greedy anchor-scored alignment of every train configuration to its best remaining test configuration.
RmsAlignment rms_align(const ConfigurationSet& train, const ConfigurationSet& test, const AnchorSet& anchors,
                       double theta = ScoreParams{}.theta);

/// JSON {pairs, mappings, merges, splits, surplus}.
void save_alignment_json(const RmsAlignment& alignment, const std::filesystem::path& path);

} // namespace confmix
