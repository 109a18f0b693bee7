#include "confmix/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "confmix/error.hpp"

namespace confmix {

double score(const Configuration& a, const Configuration& b, double theta) {
    if (a.size() != b.size()) {
        throw AlignmentInputError(fmt::format("score of configurations with {} and {} samples", a.size(), b.size()));
    }
    const double na = a.n_clusters();
    const double nb = b.n_clusters();
    return ari(a, b) - theta * std::abs((na - nb) / (na + nb));
}

TwoWalkLaplacian two_walk_laplacian(const ContingencyTable& c) {
    if (c.rows() == 0 || c.cols() == 0 || c.total == 0) {
        throw DataError("two-walk Laplacian needs a non-empty, non-zero contingency table");
    }
    const Eigen::MatrixXd m = c.counts.cast<double>();
    const auto r = static_cast<Eigen::Index>(c.rows());
    const auto q = static_cast<Eigen::Index>(c.cols());

    Eigen::MatrixXd walk(r + q, r + q);
    walk.topLeftCorner(r, r) = m * m.transpose();
    walk.topRightCorner(r, q) = m;
    walk.bottomLeftCorner(q, r) = m.transpose();
    walk.bottomRightCorner(q, q) = m.transpose() * m;

    TwoWalkLaplacian l;
    l.rows = c.rows();
    l.cols = c.cols();
    l.degree = walk.rowwise().sum();
    l.matrix = -walk;
    l.matrix.diagonal() += l.degree;
    return l;
}

namespace {

/// Components of the graph whose edges are the non-zero off-diagonal entries.
std::vector<std::size_t> components(const Eigen::MatrixXd& adjacency_like, std::size_t& count) {
    const auto n = static_cast<std::size_t>(adjacency_like.rows());
    std::vector<std::size_t> comp(n, std::numeric_limits<std::size_t>::max());
    count = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] != std::numeric_limits<std::size_t>::max()) continue;
        comp[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t u = 0; u < n; ++u) {
                if (u != v && adjacency_like(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) != 0.0 &&
                    comp[u] == std::numeric_limits<std::size_t>::max()) {
                    comp[u] = count;
                    stack.push_back(u);
                }
            }
        }
        ++count;
    }
    return comp;
}

void fix_sign(Eigen::VectorXd& v) {
    const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > tol) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

} // namespace

FiedlerResult fiedler_vector(const Eigen::MatrixXd& laplacian) {
    const auto n = laplacian.rows();
    if (n < 2 || laplacian.cols() != n) {
        throw DataError("Fiedler vector needs a square Laplacian of size >= 2");
    }
    FiedlerResult out;
    std::size_t n_comp = 0;
    const auto comp = components(laplacian, n_comp);
    out.n_components = n_comp;

    if (n_comp > 1) {
        // Null-space vector: +1/|S| on the component of vertex 0, -1/|rest| elsewhere.
        const double inside = static_cast<double>(std::count(comp.begin(), comp.end(), comp[0]));
        const double outside = static_cast<double>(n) - inside;
        out.vector.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            out.vector[i] = comp[static_cast<std::size_t>(i)] == comp[0] ? 1.0 / inside : -1.0 / outside;
        }
        out.vector.normalize();
        out.eigenvalue = 0.0;
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver failed on the Laplacian");
    }
    const auto& values = solver.eigenvalues();
    const double threshold = 1e-9 * std::max(std::abs(values[0]), std::abs(values[n - 1]));
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values[i] > threshold) {
            pick = i;
            break;
        }
    }
    if (pick < 0) throw NumericalError("Laplacian has no positive eigenvalue");
    out.vector = solver.eigenvectors().col(pick);
    out.eigenvalue = values[pick];
    fix_sign(out.vector);
    return out;
}

FiedlerResult fiedler_vector(const TwoWalkLaplacian& laplacian) { return fiedler_vector(laplacian.matrix); }

std::vector<Label> AlignmentMapping::apply(std::span<const Label> labels) const {
    std::vector<Label> out;
    out.reserve(labels.size());
    for (Label l : labels) out.push_back((*this)(l));
    return out;
}

std::int64_t AlignmentMapping::assignment_mass(const ContingencyTable& c) const {
    std::int64_t mass = 0;
    for (auto [ref, src] : pairs) {
        if (static_cast<std::size_t>(ref) <= c.rows() && static_cast<std::size_t>(src) <= c.cols()) {
            mass += c.counts(ref - 1, src - 1);
        }
    }
    return mass;
}

namespace {

/// Completes a mapping from a partial column -> row matching.
///
/// A column goes to its matched row unless some other row shares strictly more
/// samples with it; unmatched columns always go to their largest row. With
/// `reassign_matched` false, matched columns are never moved.
AlignmentMapping finish_mapping(const ContingencyTable& c, const std::vector<std::ptrdiff_t>& matched_row,
                                bool reassign_matched) {
    const std::size_t rows = c.rows();
    const std::size_t cols = c.cols();
    AlignmentMapping m;
    m.target.assign(cols, 0);

    Label next_fresh = static_cast<Label>(rows) + 1;
    for (std::size_t q = 0; q < cols; ++q) {
        const auto col = static_cast<Eigen::Index>(q);
        const std::ptrdiff_t matched = matched_row[q];
        if (c.col_sums[q] == 0) {
            m.target[q] = next_fresh++;
            m.fresh.push_back(static_cast<Label>(q + 1));
            continue;
        }
        Eigen::Index best = matched >= 0 ? matched : 0;
        for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(rows); ++p) {
            if (c.counts(p, col) > c.counts(best, col)) best = p;
        }
        const std::int64_t diagonal = matched >= 0 ? c.counts(matched, col) : 0;
        if (matched >= 0 && !reassign_matched) {
            best = matched;
        } else if (matched >= 0 && c.counts(best, col) <= diagonal) {
            best = matched;
        }
        m.target[q] = static_cast<Label>(best + 1);
    }

    // one-to-one pairs: per reference label, the mapped source sharing the most samples
    std::map<Label, std::vector<Label>> by_target;
    for (std::size_t q = 0; q < cols; ++q) by_target[m.target[q]].push_back(static_cast<Label>(q + 1));
    for (const auto& [ref, sources] : by_target) {
        if (static_cast<std::size_t>(ref) > rows) continue;
        Label best = sources.front();
        for (Label s : sources) {
            if (c.counts(ref - 1, s - 1) > c.counts(ref - 1, best - 1)) best = s;
        }
        m.pairs.emplace_back(ref, best);
        if (sources.size() > 1) m.merges.push_back({ref, sources});
    }

    // reference clusters nobody maps to: record the source cluster that absorbed them
    std::map<Label, std::vector<Label>> absorbed;
    for (std::size_t p = 0; p < rows; ++p) {
        const Label ref = static_cast<Label>(p + 1);
        if (by_target.count(ref) || c.row_sums[p] == 0) continue;
        Eigen::Index best = 0;
        for (Eigen::Index q = 1; q < static_cast<Eigen::Index>(cols); ++q) {
            if (c.counts(static_cast<Eigen::Index>(p), q) > c.counts(static_cast<Eigen::Index>(p), best)) best = q;
        }
        absorbed[static_cast<Label>(best + 1)].push_back(ref);
    }
    for (auto& [src, refs] : absorbed) {
        std::vector<Label> into{m.target[static_cast<std::size_t>(src - 1)]};
        into.insert(into.end(), refs.begin(), refs.end());
        m.splits.push_back({src, std::move(into)});
    }
    return m;
}

template <typename Key>
std::vector<std::size_t> sorted_by(std::vector<std::size_t> nodes, Key key) {
    std::stable_sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) {
        const double ka = key(a), kb = key(b);
        if (ka != kb) return ka < kb;
        return a < b;
    });
    return nodes;
}

} // namespace

AlignmentMapping rms_mapping(const ContingencyTable& c) {
    const TwoWalkLaplacian l = two_walk_laplacian(c);
    const std::size_t rows = l.rows;
    const std::size_t size = l.size();

    std::size_t n_comp = 0;
    const auto comp = components(l.matrix, n_comp);

    // Within each component, rows and columns are ranked by that component's
    // Fiedler vector and paired rank by rank.
    std::vector<std::ptrdiff_t> matched_row(l.cols, -1);
    for (std::size_t k = 0; k < n_comp; ++k) {
        std::vector<std::size_t> nodes;
        for (std::size_t v = 0; v < size; ++v) {
            if (comp[v] == k) nodes.push_back(v);
        }
        std::vector<std::size_t> comp_rows, comp_cols;
        for (std::size_t v : nodes) (v < rows ? comp_rows : comp_cols).push_back(v);
        if (comp_rows.empty() || comp_cols.empty()) continue;

        std::vector<double> key(size, 0.0);
        if (nodes.size() >= 3) {
            Eigen::MatrixXd sub(nodes.size(), nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                for (std::size_t j = 0; j < nodes.size(); ++j) {
                    sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        l.matrix(static_cast<Eigen::Index>(nodes[i]), static_cast<Eigen::Index>(nodes[j]));
                }
            }
            const FiedlerResult f = fiedler_vector(sub);
            for (std::size_t i = 0; i < nodes.size(); ++i) key[nodes[i]] = f.vector[static_cast<Eigen::Index>(i)];
        }
        const auto by_key = [&](std::size_t v) { return key[v]; };
        const auto ordered_rows = sorted_by(comp_rows, by_key);
        const auto ordered_cols = sorted_by(comp_cols, by_key);
        for (std::size_t t = 0; t < std::min(ordered_rows.size(), ordered_cols.size()); ++t) {
            matched_row[ordered_cols[t] - rows] = static_cast<std::ptrdiff_t>(ordered_rows[t]);
        }
    }
    return finish_mapping(c, matched_row, true);
}

AlignmentMapping pair_mapping(const Configuration& a, const Configuration& b, double theta) {
    AlignmentMapping m = rms_mapping(contingency(a, b));
    m.score = score(a, b, theta);
    return m;
}

AlignmentMapping hungarian_mapping(const ContingencyTable& c) {
    if (c.rows() == 0 || c.cols() == 0) throw DataError("assignment needs a non-empty contingency table");
    const Assignment assignment = max_assignment(c.counts.cast<double>());
    std::vector<std::ptrdiff_t> matched_row(c.cols(), -1);
    for (std::size_t r = 0; r < c.rows(); ++r) {
        if (assignment.row_to_col[r] >= 0) matched_row[static_cast<std::size_t>(assignment.row_to_col[r])] = static_cast<std::ptrdiff_t>(r);
    }
    return finish_mapping(c, matched_row, false);
}

AnchorSet select_anchors(std::size_t n, double fraction, std::uint64_t seed, std::size_t min_count) {
    if (n == 0) throw DataError("cannot select anchors from an empty set");
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw UsageError(fmt::format("anchor fraction must be in (0, 1], got {}", fraction));
    }
    const auto by_fraction = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    const std::size_t count = std::min(n, std::max(min_count, by_fraction));

    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(pool[i], pool[j]);
    }
    AnchorSet anchors;
    anchors.indices.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(anchors.indices.begin(), anchors.indices.end());
    anchors.fraction = fraction;
    anchors.seed = seed;
    return anchors;
}

void save_anchors(const AnchorSet& anchors, const std::filesystem::path& path) {
    nlohmann::ordered_json j = {{"seed", anchors.seed}, {"fraction", anchors.fraction}, {"indices", anchors.indices}};
    if (!anchors.test_indices.empty()) j["test_indices"] = anchors.test_indices;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

AnchorSet load_anchors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open anchors file " + path.string());
    AnchorSet anchors;
    try {
        nlohmann::json j;
        in >> j;
        anchors.seed = j.value("seed", std::uint64_t{0});
        anchors.fraction = j.value("fraction", 0.001);
        anchors.indices = j.at("indices").get<std::vector<std::size_t>>();
        if (j.contains("test_indices")) anchors.test_indices = j.at("test_indices").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    for (std::size_t i = 1; i < anchors.indices.size(); ++i) {
        if (anchors.indices[i] <= anchors.indices[i - 1]) {
            throw FormatError(path.string() + ": anchor indices must be strictly increasing");
        }
    }
    if (!anchors.test_indices.empty() && anchors.test_indices.size() != anchors.indices.size()) {
        throw FormatError(path.string() + ": test_indices must pair one-to-one with indices");
    }
    return anchors;
}

namespace {

ContingencyTable anchor_contingency(const Configuration& train, const Configuration& test, const AnchorSet& anchors) {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts =
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(train.n_clusters(), test.n_clusters());
    const auto& test_rows = anchors.test_rows();
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        ++counts(train[anchors.indices[a]] - 1, test[test_rows[a]] - 1);
    }
    return ContingencyTable::from_counts(std::move(counts));
}

void check_anchor_range(const std::vector<std::size_t>& rows, std::size_t n, const char* which) {
    for (std::size_t r : rows) {
        if (r >= n) {
            throw AlignmentInputError(fmt::format("anchor index {} out of range for the {} set of {} samples", r,
                                                  which, n));
        }
    }
}

} // namespace

RmsAlignment rms_align(const ConfigurationSet& train, const ConfigurationSet& test, const AnchorSet& anchors,
                       double theta) {
    if (train.empty()) throw AlignmentInputError("train configuration set is empty");
    if (test.empty()) throw AlignmentInputError("test configuration set is empty");
    if (anchors.size() == 0) throw AlignmentInputError("anchor set is empty");
    check_anchor_range(anchors.indices, train.n_samples(), "train");
    check_anchor_range(anchors.test_rows(), test.n_samples(), "test");
    if (anchors.test_rows().size() != anchors.size()) {
        throw AlignmentInputError("anchor train and test rows differ in length");
    }
    const bool shared_samples = train.n_samples() == test.n_samples() && anchors.test_indices.empty();
    if (!shared_samples) {
        spdlog::info("align: train and test differ in samples; mappings are computed on the {} anchor rows",
                     anchors.size());
    }

    std::vector<Configuration> train_anchor, test_anchor;
    for (const auto& c : train.configurations()) train_anchor.push_back(c.restrict_to(anchors.indices));
    for (const auto& c : test.configurations()) test_anchor.push_back(c.restrict_to(anchors.test_rows()));

    RmsAlignment out;
    std::vector<bool> available(test.size(), true);
    for (std::size_t i = 0; i < train.size(); ++i) {
        double best_score = -std::numeric_limits<double>::infinity();
        std::optional<std::size_t> best_j;
        for (std::size_t j = 0; j < test.size(); ++j) {
            if (!available[j]) continue;
            const double s = score(train_anchor[i], test_anchor[j], theta);
            if (s > best_score) {
                best_score = s;
                best_j = j;
            }
        }
        if (!best_j) break;
        const std::size_t j = *best_j;

        AlignmentMapping mapping = shared_samples ? rms_mapping(contingency(train[i], test[j]))
                                                  : rms_mapping(anchor_contingency(train[i], test[j], anchors));
        mapping.score = best_score;
        out.aligned.columns.push_back(mapping.apply(test[j].labels()));
        out.aligned.gammas.push_back(train.gammas()[i]);
        out.pairs.push_back({i, j, best_score});
        out.mappings.push_back(std::move(mapping));
        available[j] = false;
    }
    for (std::size_t j = 0; j < test.size(); ++j) {
        if (!available[j]) continue;
        spdlog::warn("align: test configuration {} has no train partner; appended unaligned", j + 1);
        out.surplus.push_back(j);
        out.aligned.columns.push_back(test[j].labels());
        out.aligned.gammas.push_back(test.gammas()[j]);
    }
    return out;
}

void save_alignment_json(const RmsAlignment& alignment, const std::filesystem::path& path) {
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    nlohmann::ordered_json mappings = nlohmann::ordered_json::array();
    nlohmann::ordered_json merges = nlohmann::ordered_json::array();
    nlohmann::ordered_json splits = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < alignment.pairs.size(); ++p) {
        const auto& pair = alignment.pairs[p];
        const auto& m = alignment.mappings[p];
        // columns are reported 1-based like labels
        pairs.push_back({{"train_col", pair.train_col + 1}, {"test_col", pair.test_col + 1}, {"score", pair.score}});
        for (std::size_t k = 0; k < m.target.size(); ++k) {
            mappings.push_back({{"test_col", pair.test_col + 1}, {"from", k + 1}, {"to", m.target[k]}});
        }
        for (const auto& merge : m.merges) {
            merges.push_back({{"test_col", pair.test_col + 1}, {"into", merge.into}, {"labels", merge.sources}});
        }
        for (const auto& split : m.splits) {
            splits.push_back({{"test_col", pair.test_col + 1}, {"label", split.source}, {"into", split.into}});
        }
    }
    nlohmann::ordered_json surplus = nlohmann::ordered_json::array();
    for (std::size_t j : alignment.surplus) surplus.push_back(j + 1);
    const nlohmann::ordered_json j = {
        {"pairs", pairs}, {"mappings", mappings}, {"merges", merges}, {"splits", splits}, {"surplus", surplus}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

} // namespace confmix
