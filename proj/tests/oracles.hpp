#pragma once

// Independent reference implementations. None of these call into the library
// beyond its plain data types, so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

/// ARI from the 2x2 pair-confusion counts over all unordered sample pairs.
inline double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
    long double same_both = 0, same_a = 0, same_b = 0, neither = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) same_both += 1;
            else if (sa) same_a += 1;
            else if (sb) same_b += 1;
            else neither += 1;
        }
    }
    const long double num = 2.0L * (same_both * neither - same_a * same_b);
    const long double den = (same_both + same_a) * (same_a + neither) + (same_both + same_b) * (same_b + neither);
    if (den == 0) {
        // Pair relations agree everywhere exactly when the partitions coincide.
        return (same_a == 0 && same_b == 0) ? 1.0 : 0.0;
    }
    return static_cast<double>(num / den);
}

/// Calls visit(labels) for every set partition of n items, labels 1-based by first appearance.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> labels(n, 1);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
        if (i == n) {
            visit(labels);
            return;
        }
        for (int l = 1; l <= used + 1; ++l) {
            labels[i] = l;
            rec(i + 1, std::max(used, l));
        }
    };
    if (n == 0) return;
    labels[0] = 1;
    rec(1, 1);
}

struct DenseGraph {
    std::size_t n = 0;
    std::vector<double> w;  // symmetric n x n, zero diagonal

    double at(std::size_t i, std::size_t j) const { return w[i * n + j]; }
};

inline DenseGraph random_dense_graph(std::size_t n, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    DenseGraph g{n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (unit(rng) < density || j == i + 1) {  // the path keeps it connected
                const double x = weight(rng);
                g.w[i * n + j] = x;
                g.w[j * n + i] = x;
            }
        }
    }
    return g;
}

/// -within-cluster weight + gamma * penalty, straight from the definitions.
inline double objective(const DenseGraph& g, const std::vector<int>& labels, double gamma, bool modularity) {
    double within = 0.0;
    double total = 0.0;
    std::vector<double> degree(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = i + 1; j < g.n; ++j) {
            total += g.at(i, j);
            if (labels[i] == labels[j]) within += g.at(i, j);
        }
        for (std::size_t j = 0; j < g.n; ++j) degree[i] += g.at(i, j);
    }
    double penalty = 0.0;
    if (modularity) {
        const int k = *std::max_element(labels.begin(), labels.end());
        std::vector<double> vol(static_cast<std::size_t>(k) + 1, 0.0);
        for (std::size_t i = 0; i < g.n; ++i) vol[static_cast<std::size_t>(labels[i])] += degree[i];
        for (double v : vol) penalty += v * v / (2.0 * total);
    } else {
        for (std::size_t i = 0; i < g.n; ++i)
            for (std::size_t j = i + 1; j < g.n; ++j)
                if (labels[i] == labels[j]) penalty += 1.0;
    }
    return -within + gamma * penalty;
}

inline double min_objective(const DenseGraph& g, double gamma, bool modularity) {
    double best = std::numeric_limits<double>::infinity();
    for_each_partition(g.n, [&](const std::vector<int>& labels) {
        best = std::min(best, objective(g, labels, gamma, modularity));
    });
    return best;
}

/// Largest sum of entries picking at most one per row and column, trying every injection
/// of the smaller side into the larger.
inline double max_assignment_brute(const std::vector<std::vector<double>>& profit) {
    const std::size_t rows = profit.size();
    const std::size_t cols = rows ? profit[0].size() : 0;
    const bool transpose = rows > cols;
    const std::size_t small = transpose ? cols : rows;
    const std::size_t large = transpose ? rows : cols;
    auto value = [&](std::size_t s, std::size_t l) { return transpose ? profit[l][s] : profit[s][l]; };
    double best = -std::numeric_limits<double>::infinity();
    std::vector<bool> used(large, false);
    std::function<void(std::size_t, double)> rec = [&](std::size_t s, double acc) {
        if (s == small) {
            best = std::max(best, acc);
            return;
        }
        for (std::size_t l = 0; l < large; ++l) {
            if (used[l]) continue;
            used[l] = true;
            rec(s + 1, acc + value(s, l));
            used[l] = false;
        }
    };
    rec(0, 0.0);
    return best;
}

struct EigenPairs {
    std::vector<long double> values;                // ascending
    std::vector<std::vector<long double>> vectors;  // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi rotations in extended precision.
inline EigenPairs jacobi(const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<long double>> a(n, std::vector<long double>(n));
    std::vector<std::vector<long double>> v(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i) {
        v[i][i] = 1.0L;
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j];
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        long double off = 0.0L;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-36L) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300L) continue;
                const long double theta = (a[q][q] - a[p][p]) / (2.0L * a[p][q]);
                const long double t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
                const long double c = 1.0L / std::sqrt(t * t + 1.0L);
                const long double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const long double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const long double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const long double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] < a[y][y]; });
    EigenPairs out;
    for (std::size_t k : order) {
        out.values.push_back(a[k][k]);
        std::vector<long double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
        out.vectors.push_back(col);
    }
    return out;
}

/// Random labels in 1..k, then compacted so every label occurs.
inline std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(1, k);
    std::vector<int> raw(n);
    for (auto& x : raw) x = pick(rng);
    std::vector<int> seen;
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = std::find(seen.begin(), seen.end(), raw[i]);
        if (it == seen.end()) {
            seen.push_back(raw[i]);
            out[i] = static_cast<int>(seen.size());
        } else {
            out[i] = static_cast<int>(it - seen.begin()) + 1;
        }
    }
    return out;
}

} // namespace oracle
