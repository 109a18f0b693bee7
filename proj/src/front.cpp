#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "confmix/cluster.hpp"
#include "confmix/error.hpp"
#include "confmix/parallel.hpp"

namespace confmix {

std::vector<const FrontEntry*> BlueRedFront::nontrivial() const {
    std::vector<const FrontEntry*> out;
    for (const auto& e : entries) {
        if (e.configuration != all_in_one && e.configuration != all_lonely) out.push_back(&e);
    }
    return out;
}

double crossing_gamma(double attraction_a, double repulsion_a, double attraction_b, double repulsion_b) {
    const double dr = repulsion_a - repulsion_b;
    if (dr == 0.0) {
        throw NumericalError("objective lines with equal repulsion never cross");
    }
    return (attraction_a - attraction_b) / dr;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_labels(const Configuration& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Label l : c.labels()) h = splitmix64(h ^ static_cast<std::uint64_t>(l));
    return h;
}

struct Line {
    Configuration configuration;
    double attraction;
    double repulsion;

    double at(double gamma) const { return -attraction + gamma * repulsion; }
};

struct Hull {
    std::vector<std::size_t> lines;
    std::vector<double> breaks; // breaks[t] = crossing of lines[t] and lines[t + 1]
};

/// Lower envelope of the lines on [0, gamma_max]; ties keep the earlier line.
Hull lower_envelope(const std::vector<Line>& lines, double gamma_max) {
    std::vector<std::size_t> order(lines.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // steepest first; among equal slopes the lowest (largest attraction), then oldest
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (lines[a].repulsion != lines[b].repulsion) return lines[a].repulsion > lines[b].repulsion;
        return lines[a].attraction > lines[b].attraction;
    });

    // l2 is nowhere strictly below both neighbours if cross(l1,l2) >= cross(l2,l3)
    auto redundant = [&](std::size_t l1, std::size_t l2, std::size_t l3) {
        const Line& a = lines[l1];
        const Line& b = lines[l2];
        const Line& c = lines[l3];
        return (a.attraction - b.attraction) * (b.repulsion - c.repulsion) >=
               (b.attraction - c.attraction) * (a.repulsion - b.repulsion);
    };

    std::vector<std::size_t> hull;
    for (std::size_t idx : order) {
        if (!hull.empty() && lines[hull.back()].repulsion == lines[idx].repulsion) continue;
        // a line that is nowhere below the last one (larger slope already handled by sort)
        while (!hull.empty() && lines[idx].attraction >= lines[hull.back()].attraction &&
               lines[idx].repulsion <= lines[hull.back()].repulsion) {
            hull.pop_back();
        }
        while (hull.size() >= 2 && redundant(hull[hull.size() - 2], hull.back(), idx)) hull.pop_back();
        hull.push_back(idx);
    }

    auto cross = [&](std::size_t a, std::size_t b) {
        return crossing_gamma(lines[a].attraction, lines[a].repulsion, lines[b].attraction, lines[b].repulsion);
    };
    std::size_t first = 0;
    while (first + 1 < hull.size() && cross(hull[first], hull[first + 1]) <= 0.0) ++first;
    std::size_t last = hull.size();
    while (last - first >= 2 && cross(hull[last - 2], hull[last - 1]) >= gamma_max) --last;

    Hull out;
    out.lines.assign(hull.begin() + static_cast<std::ptrdiff_t>(first), hull.begin() + static_cast<std::ptrdiff_t>(last));
    for (std::size_t t = 0; t + 1 < out.lines.size(); ++t) out.breaks.push_back(cross(out.lines[t], out.lines[t + 1]));
    return out;
}

} // namespace

BlueRedFront descending_triangulation(const AffinityGraph& g, const FrontOptions& options) {
    const std::size_t n = g.n_vertices();
    if (n == 0) throw DataError("cannot build a front for an empty graph");

    BlueRedFront front;
    front.mode = options.mode;
    front.all_in_one = Configuration::all_in_one(n);
    front.all_lonely = Configuration::all_lonely(n);
    front.gamma_max = front_gamma_max(g, options.mode);
    if (!(front.gamma_max > 0.0)) {
        throw DataError("graph has no edges; every resolution yields the all-lonely configuration");
    }

    std::vector<Line> lines;
    std::unordered_multimap<std::uint64_t, std::size_t> by_hash;
    auto add_line = [&](Configuration c) -> bool {
        const std::uint64_t h = hash_labels(c);
        auto [lo, hi] = by_hash.equal_range(h);
        for (auto it = lo; it != hi; ++it) {
            if (lines[it->second].configuration == c) return false;
        }
        const double a = attraction(c, g);
        const double r = repulsion(c, g, options.mode);
        by_hash.emplace(h, lines.size());
        lines.push_back({std::move(c), a, r});
        return true;
    };
    add_line(front.all_in_one);
    add_line(front.all_lonely);

    std::set<std::pair<std::size_t, std::size_t>> checked;
    while (true) {
        const Hull hull = lower_envelope(lines, front.gamma_max);
        std::vector<std::pair<std::size_t, std::size_t>> pending;
        std::vector<double> gammas;
        for (std::size_t t = 0; t + 1 < hull.lines.size(); ++t) {
            const auto key = std::make_pair(hull.lines[t], hull.lines[t + 1]);
            if (checked.count(key)) continue;
            pending.push_back(key);
            gammas.push_back(hull.breaks[t]);
        }
        if (pending.empty()) break;
        const std::size_t runs = (options.warm_start ? 1 : 0) + std::max<std::size_t>(options.restarts, options.warm_start ? 0 : 1);
        if (front.leiden_calls + pending.size() * runs > options.max_leiden_calls) {
            spdlog::warn("front: Leiden budget of {} calls exhausted; envelope may be incomplete",
                         options.max_leiden_calls);
            break;
        }

        // Crossings are independent; each run's seed depends only on its gamma and slot.
        std::vector<std::optional<Configuration>> tried(pending.size() * runs);
        parallel_for(tried.size(), [&](std::size_t job) {
            const std::size_t p = job / runs;
            const std::size_t slot = job % runs;
            LeidenOptions lo;
            lo.seed = splitmix64(options.seed ^ std::bit_cast<std::uint64_t>(gammas[p]) ^ (slot * 0xd1b54a32d192ed03ULL));
            if (options.warm_start && slot == 0) {
                lo.initial = lines[pending[p].first].configuration;
            }
            tried[job] = leiden_at_gamma(g, gammas[p], options.mode, lo);
        });
        front.leiden_calls += tried.size();

        std::vector<std::optional<Configuration>> found(pending.size());
        for (std::size_t p = 0; p < pending.size(); ++p) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t slot = 0; slot < runs; ++slot) {
                auto& c = tried[p * runs + slot];
                const double value = objective(*c, g, gammas[p], options.mode);
                if (value < best) {
                    best = value;
                    found[p] = std::move(c);
                }
            }
        }

        for (std::size_t p = 0; p < pending.size(); ++p) {
            checked.insert(pending[p]);
            const double gamma = gammas[p];
            const double level = std::min(lines[pending[p].first].at(gamma), lines[pending[p].second].at(gamma));
            const double a = attraction(*found[p], g);
            const double r = repulsion(*found[p], g, options.mode);
            const double value = -a + gamma * r;
            const double tol = 1e-12 * std::max({1.0, std::abs(level), std::abs(a), gamma * std::abs(r)});
            if (value < level - tol) {
                add_line(std::move(*found[p]));
            }
        }
    }

    const Hull hull = lower_envelope(lines, front.gamma_max);
    for (std::size_t t = 0; t < hull.lines.size(); ++t) {
        const Line& line = lines[hull.lines[t]];
        FrontEntry e{line.configuration, 0.0, line.attraction, line.repulsion, 0.0, front.gamma_max};
        e.interval_lo = t == 0 ? 0.0 : hull.breaks[t - 1];
        e.interval_hi = t + 1 == hull.lines.size() ? front.gamma_max : hull.breaks[t];
        e.gamma_star = 0.5 * (e.interval_lo + e.interval_hi);
        front.entries.push_back(std::move(e));
    }
    spdlog::debug("front: {} entries from {} candidate lines, {} Leiden calls", front.entries.size(), lines.size(),
                  front.leiden_calls);
    return front;
}

ConfigurationSet front_configurations(const BlueRedFront& front) {
    std::vector<Configuration> configurations;
    std::vector<double> gammas;
    for (const FrontEntry* e : front.nontrivial()) {
        if (!configurations.empty() && e->configuration.n_clusters() < configurations.back().n_clusters()) {
            spdlog::debug("front: dropping entry at gamma {} ({} clusters) to keep coarse-to-fine order",
                          e->gamma_star, e->configuration.n_clusters());
            continue;
        }
        configurations.push_back(e->configuration);
        gammas.push_back(e->gamma_star);
    }
    return ConfigurationSet(std::move(configurations), std::move(gammas));
}

AffinityGraph build_clustering_graph(const FeatureMatrix& x, const ExtractParams& params) {
    const AffinityGraph knn = knn_build(x, params.k);
    const AffinityGraph weighted =
        params.reweight ? sgtsne_reweight(knn, params.reweight_params) : column_stochastic(knn);
    return params.symmetrization == Symmetrization::mean ? symmetrize(weighted) : symmetrize_union(weighted);
}

Extraction extract(const FeatureMatrix& x, const ExtractParams& params) {
    AffinityGraph graph = build_clustering_graph(x, params);
    BlueRedFront front = descending_triangulation(graph, params.front);
    ConfigurationSet set = front_configurations(front);
    return {std::move(graph), std::move(front), std::move(set)};
}

ConfigurationSet extract_configurations(const FeatureMatrix& x, const ExtractParams& params) {
    return extract(x, params).configurations;
}

} // namespace confmix
