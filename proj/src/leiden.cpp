#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <fmt/format.h>

#include "confmix/cluster.hpp"
#include "confmix/error.hpp"

namespace confmix {

std::string_view to_string(QualityMode mode) {
    return mode == QualityMode::cpm ? "cpm" : "rb";
}

QualityMode parse_quality_mode(std::string_view text) {
    if (text == "cpm") return QualityMode::cpm;
    if (text == "rb" || text == "rb-modularity") return QualityMode::rb_modularity;
    throw UsageError(fmt::format("unknown quality mode '{}' (expected cpm or rb)", text));
}

namespace {

void check_size(const Configuration& omega, const AffinityGraph& g) {
    if (omega.size() != g.n_vertices()) {
        throw DataError(fmt::format("configuration has {} samples but the graph has {} vertices", omega.size(),
                                    g.n_vertices()));
    }
}

double total_weight(const AffinityGraph& g) { return 0.5 * g.adjacency().sum(); }

} // namespace

double attraction(const Configuration& omega, const AffinityGraph& g) {
    check_size(omega, g);
    const auto& a = g.adjacency();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
        for (AffinityGraph::Matrix::InnerIterator it(a, j); it; ++it) {
            if (omega[static_cast<std::size_t>(it.row())] == omega[static_cast<std::size_t>(j)]) sum += it.value();
        }
    }
    return 0.5 * sum;
}

double repulsion(const Configuration& omega, const AffinityGraph& g, QualityMode mode) {
    check_size(omega, g);
    if (mode == QualityMode::cpm) {
        double pairs = 0.0;
        for (std::size_t n : omega.cluster_sizes()) pairs += 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
        return pairs;
    }
    const double w = total_weight(g);
    if (!(w > 0.0)) throw DataError("RB modularity needs a graph with positive total weight");
    std::vector<double> vol(static_cast<std::size_t>(omega.n_clusters()), 0.0);
    const auto deg = g.out_degrees();
    for (std::size_t i = 0; i < deg.size(); ++i) vol[static_cast<std::size_t>(omega[i] - 1)] += deg[i];
    double sum = 0.0;
    for (double v : vol) sum += v * v;
    return sum / (2.0 * w);
}

double objective(const Configuration& omega, const AffinityGraph& g, double gamma, QualityMode mode) {
    return -attraction(omega, g) + gamma * repulsion(omega, g, mode);
}

double front_gamma_max(const AffinityGraph& g, QualityMode mode) {
    const auto& a = g.adjacency();
    if (mode == QualityMode::cpm) {
        double max_w = 0.0;
        for (Eigen::Index k = 0; k < a.nonZeros(); ++k) max_w = std::max(max_w, a.valuePtr()[k]);
        return max_w;
    }
    // Merging i and j gains w_ij and costs gamma d_i d_j / W; summed over all
    // co-clustered pairs this bounds every partition by the all-lonely one.
    const double w = total_weight(g);
    const auto deg = g.out_degrees();
    double bound = 0.0;
    for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
        for (AffinityGraph::Matrix::InnerIterator it(a, j); it; ++it) {
            const double dd = deg[static_cast<std::size_t>(it.row())] * deg[static_cast<std::size_t>(j)];
            bound = std::max(bound, it.value() * w / dd);
        }
    }
    return bound;
}

namespace {

using Index = std::uint32_t;

/// Undirected CSR graph with node weights; the working graph of one Leiden level.
struct WorkGraph {
    std::size_t n = 0;
    std::vector<std::size_t> offsets;
    std::vector<Index> targets;
    std::vector<double> weights;
    std::vector<double> node_weights;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    void shuffle(std::vector<Index>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

bool improves(double candidate, double incumbent) {
    return candidate > incumbent + 1e-12 * std::max(std::abs(candidate), std::abs(incumbent));
}

/// Sparse accumulator for weights from one node to neighbouring communities.
class NeighborWeights {
public:
    explicit NeighborWeights(std::size_t n) : weight_(n, 0.0), seen_(n, 0) {}
    void add(Index c, double w) {
        if (!seen_[c]) {
            seen_[c] = 1;
            touched_.push_back(c);
        }
        weight_[c] += w;
    }
    double operator[](Index c) const { return weight_[c]; }
    const std::vector<Index>& touched() const { return touched_; }
    void clear() {
        for (Index c : touched_) {
            weight_[c] = 0.0;
            seen_[c] = 0;
        }
        touched_.clear();
    }

private:
    std::vector<double> weight_;
    std::vector<char> seen_;
    std::vector<Index> touched_;
};

std::size_t count_communities(const std::vector<Index>& comm) {
    std::vector<char> used(comm.size(), 0);
    std::size_t count = 0;
    for (Index c : comm) {
        if (!used[c]) {
            used[c] = 1;
            ++count;
        }
    }
    return count;
}

// Quality maximized is A - gamma * kappa * sum_c S_c^2 / 2, where S_c sums node
// weights; the gain of moving v (weight s) into community D is w(v, D) - gamma kappa s S_D.

/// Fast local moving. Returns true if any node changed community.
bool move_nodes(const WorkGraph& g, std::vector<Index>& comm, double resolution, Rng& rng) {
    const std::size_t n = g.n;
    std::vector<double> size(n, 0.0);
    std::vector<std::size_t> members(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        size[comm[v]] += g.node_weights[v];
        ++members[comm[v]];
    }
    std::vector<Index> empty;
    for (std::size_t c = n; c-- > 0;) {
        if (members[c] == 0) empty.push_back(static_cast<Index>(c));
    }

    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    rng.shuffle(order);
    std::vector<Index> queue(order.begin(), order.end());
    std::vector<char> queued(n, 1);
    std::size_t head = 0;

    NeighborWeights nw(n);
    bool changed = false;
    while (head < queue.size()) {
        const Index v = queue[head++];
        queued[v] = 0;
        const Index current = comm[v];
        const double sv = g.node_weights[v];

        for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            if (g.targets[e] != v) nw.add(comm[g.targets[e]], g.weights[e]);
        }
        size[current] -= sv;
        --members[current];

        Index best = current;
        double best_gain = nw[current] - resolution * sv * size[current];
        for (Index c : nw.touched()) {
            if (c == current) continue;
            const double gain = nw[c] - resolution * sv * size[c];
            if (improves(gain, best_gain)) {
                best = c;
                best_gain = gain;
            }
        }
        if (members[current] > 0 && improves(0.0, best_gain)) {
            best = empty.back();
        }

        if (best != current) {
            if (!empty.empty() && best == empty.back()) empty.pop_back();
            if (members[current] == 0) empty.push_back(current);
            changed = true;
            for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                const Index u = g.targets[e];
                if (!queued[u] && comm[u] != best) {
                    queued[u] = 1;
                    queue.push_back(u);
                }
            }
        }
        comm[v] = best;
        size[best] += sv;
        ++members[best];
        nw.clear();

        if (head > n && head * 2 > queue.size()) {
            queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(head));
            head = 0;
        }
    }
    return changed;
}

/// Refinement: merges singletons into well-connected sub-communities of each community.
std::vector<Index> refine(const WorkGraph& g, const std::vector<Index>& comm, double resolution, Rng& rng) {
    const std::size_t n = g.n;
    std::vector<Index> refined(n);
    std::iota(refined.begin(), refined.end(), Index{0});
    std::vector<double> refined_size(g.node_weights);
    std::vector<std::size_t> refined_members(n, 1);

    std::vector<double> comm_size(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) comm_size[comm[v]] += g.node_weights[v];

    // weight from each refined community to the rest of its community
    std::vector<double> external(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            const Index u = g.targets[e];
            if (u != v && comm[u] == comm[v]) external[v] += g.weights[e];
        }
    }

    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    rng.shuffle(order);

    NeighborWeights nw(n);
    for (Index v : order) {
        if (refined_members[refined[v]] != 1) continue;
        const Index c = comm[v];
        const double sv = g.node_weights[v];
        if (external[v] < resolution * sv * (comm_size[c] - sv)) continue;

        for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            const Index u = g.targets[e];
            if (u != v && comm[u] == c) nw.add(refined[u], g.weights[e]);
        }
        const Index own = refined[v];
        Index best = own;
        double best_gain = 0.0;
        for (Index r : nw.touched()) {
            if (r == own) continue;
            const double rs = refined_size[r];
            if (external[r] < resolution * rs * (comm_size[c] - rs)) continue;
            const double gain = nw[r] - resolution * sv * rs;
            if (improves(gain, best_gain)) {
                best = r;
                best_gain = gain;
            }
        }
        if (best != own) {
            external[best] += external[own] - 2.0 * nw[best];
            refined_size[best] += sv;
            ++refined_members[best];
            refined_size[own] = 0.0;
            refined_members[own] = 0;
            refined[v] = best;
        }
        nw.clear();
    }
    return refined;
}

/// Collapses `groups` into nodes. Returns the aggregate graph and each node's group index.
WorkGraph aggregate(const WorkGraph& g, const std::vector<Index>& groups, std::vector<Index>& node_to_group) {
    std::vector<Index> remap(g.n, std::numeric_limits<Index>::max());
    Index next = 0;
    node_to_group.assign(g.n, 0);
    for (std::size_t v = 0; v < g.n; ++v) {
        Index& r = remap[groups[v]];
        if (r == std::numeric_limits<Index>::max()) r = next++;
        node_to_group[v] = r;
    }

    WorkGraph out;
    out.n = next;
    out.node_weights.assign(out.n, 0.0);
    std::vector<std::vector<Index>> members(out.n);
    for (std::size_t v = 0; v < g.n; ++v) {
        out.node_weights[node_to_group[v]] += g.node_weights[v];
        members[node_to_group[v]].push_back(static_cast<Index>(v));
    }

    out.offsets.assign(out.n + 1, 0);
    NeighborWeights nw(out.n);
    for (Index r = 0; r < out.n; ++r) {
        for (Index v : members[r]) {
            for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                const Index s = node_to_group[g.targets[e]];
                if (s != r) nw.add(s, g.weights[e]);
            }
        }
        std::vector<Index> touched = nw.touched();
        std::sort(touched.begin(), touched.end());
        for (Index s : touched) {
            out.targets.push_back(s);
            out.weights.push_back(nw[s]);
        }
        out.offsets[r + 1] = out.targets.size();
        nw.clear();
    }
    return out;
}

WorkGraph to_work_graph(const AffinityGraph& g, QualityMode mode) {
    const auto& a = g.adjacency();
    WorkGraph w;
    w.n = g.n_vertices();
    w.offsets.assign(w.n + 1, 0);
    // symmetric storage: column j lists the neighbours of j
    for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
        for (AffinityGraph::Matrix::InnerIterator it(a, j); it; ++it) {
            w.targets.push_back(static_cast<Index>(it.row()));
            w.weights.push_back(it.value());
        }
        w.offsets[static_cast<std::size_t>(j) + 1] = w.targets.size();
    }
    if (mode == QualityMode::cpm) {
        w.node_weights.assign(w.n, 1.0);
    } else {
        w.node_weights = g.out_degrees();
    }
    return w;
}

bool is_symmetric(const AffinityGraph& g) {
    const auto& a = g.adjacency();
    AffinityGraph::Matrix at = a.transpose();
    return (a - at).norm() <= 1e-12 * std::max(1.0, a.norm());
}

std::vector<Label> to_labels(const std::vector<Index>& comm) {
    std::vector<Label> raw(comm.begin(), comm.end());
    return relabel_contiguous(std::span<const Label>(raw)).labels();
}

} // namespace

Configuration leiden_at_gamma(const AffinityGraph& g, double gamma, QualityMode mode, const LeidenOptions& options) {
    const std::size_t n = g.n_vertices();
    if (n == 0) throw DataError("cannot cluster an empty graph");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw DataError(fmt::format("resolution must be finite and non-negative, got {}", gamma));
    }
    if (g.directed() && !is_symmetric(g)) {
        throw DataError("leiden_at_gamma expects a symmetrized graph");
    }

    const WorkGraph base = to_work_graph(g, mode);
    double kappa = 1.0;
    if (mode == QualityMode::rb_modularity) {
        const double w = total_weight(g);
        if (!(w > 0.0)) throw DataError("RB modularity needs a graph with positive total weight");
        kappa = 1.0 / w;
    }
    const double resolution = gamma * kappa;

    std::vector<Index> comm(n);
    if (options.initial) {
        if (options.initial->size() != n) {
            throw DataError("initial partition size does not match the graph");
        }
        for (std::size_t v = 0; v < n; ++v) comm[v] = static_cast<Index>((*options.initial)[v] - 1);
    } else {
        std::iota(comm.begin(), comm.end(), Index{0});
    }

    Rng rng(options.seed);
    std::vector<Label> labels = to_labels(comm);
    for (std::size_t pass = 0; pass < std::max<std::size_t>(1, options.max_passes); ++pass) {
        // node_level[v] = index of v's node in the current aggregate graph
        std::vector<Index> node_level(n);
        std::iota(node_level.begin(), node_level.end(), Index{0});
        WorkGraph level = base;
        std::vector<Index> partition = comm;
        bool moved_at_base = false;
        for (std::size_t depth = 0;; ++depth) {
            const bool moved = move_nodes(level, partition, resolution, rng);
            if (depth == 0) moved_at_base = moved;
            if (count_communities(partition) == level.n) break;

            std::vector<Index> groups = refine(level, partition, resolution, rng);
            if (count_communities(groups) == level.n) groups = partition;

            std::vector<Index> node_to_group;
            WorkGraph next = aggregate(level, groups, node_to_group);
            std::vector<Index> next_partition(next.n);
            std::vector<Index> compact(level.n, std::numeric_limits<Index>::max());
            Index next_id = 0;
            for (std::size_t v = 0; v < level.n; ++v) {
                Index& c = compact[partition[v]];
                if (c == std::numeric_limits<Index>::max()) c = next_id++;
                next_partition[node_to_group[v]] = c;
            }
            for (auto& x : node_level) x = node_to_group[x];
            level = std::move(next);
            partition = std::move(next_partition);
        }
        for (std::size_t v = 0; v < n; ++v) comm[v] = partition[node_level[v]];

        std::vector<Label> next_labels = to_labels(comm);
        const bool stable = next_labels == labels;
        labels = std::move(next_labels);
        if (stable && !moved_at_base) break;
    }
    return Configuration(std::move(labels));
}

} // namespace confmix
