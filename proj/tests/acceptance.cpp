// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <algorithm>
#include <map>
#include <set>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "confmix/align.hpp"
#include "confmix/cluster.hpp"
#include "confmix/configuration.hpp"
#include "confmix/datasets.hpp"
#include "confmix/graph.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace confmix;
namespace fs = std::filesystem;

namespace {

constexpr double ari_tolerance = 1e-12;
constexpr double ari_budget_s = 5.0;
constexpr double objective_rel_gap = 0.01;
constexpr double objective_budget_s = 60.0;
constexpr double envelope_tolerance = 1e-9;
constexpr double sigma_residual = 1e-6;
constexpr double moons_min_ari = 0.95;
constexpr double moons_budget_s = 30.0;
constexpr std::size_t moons_k = 10;
constexpr double laplacian_tolerance = 1e-9;
constexpr double symmetry_tolerance = 1e-12;
constexpr double fiedler_residual = 1e-8;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

AffinityGraph to_graph(const oracle::DenseGraph& d) {
    std::vector<WeightedEdge> edges;
    for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = i + 1; j < d.n; ++j)
            if (d.at(i, j) > 0.0) edges.push_back({i, j, d.at(i, j)});
    return undirected_graph(d.n, edges);
}

std::vector<double> interval_samples(const FrontEntry& e, int count) {
    std::vector<double> out;
    for (int t = 0; t < count; ++t) out.push_back(e.interval_lo + (t + 0.5) / count * (e.interval_hi - e.interval_lo));
    return out;
}

double coefficient_of_variation(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(v.size())) / mean;
}

double best_ari(const ConfigurationSet& set, const Configuration& truth) {
    double best = -1.0;
    for (const auto& c : set.configurations()) best = std::max(best, ari(c, truth));
    return best;
}

Outcome ari_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> size(2, 10);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const auto n = static_cast<std::size_t>(size(rng));
        std::uniform_int_distribution<int> k(1, static_cast<int>(n));
        const auto a = oracle::random_labels(n, k(rng), rng);
        const auto b = oracle::random_labels(n, k(rng), rng);
        const double lib = ari(testing::config(a), testing::config(b));
        worst = std::max(worst, std::abs(lib - oracle::pair_counting_ari(a, b)));
    }
    const double s = seconds_since(t0);
    return {worst <= ari_tolerance && s < ari_budget_s,
            fmt::format("500 pairs, max |diff| {:.2e} (tol {:.0e}), {:.2f} s (budget {} s)", worst, ari_tolerance, s,
                        ari_budget_s)};
}

Outcome objective_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(7);
    double worst = 0.0;
    std::size_t samples = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 5 + static_cast<std::size_t>(t % 4);
        const auto d = oracle::random_dense_graph(n, 0.5, rng);
        const auto g = to_graph(d);
        for (auto mode : {QualityMode::cpm, QualityMode::rb_modularity}) {
            FrontOptions opt;
            opt.mode = mode;
            opt.seed = static_cast<std::uint64_t>(t);
            const auto front = descending_triangulation(g, opt);
            for (const auto& e : front.entries) {
                for (double gamma : interval_samples(e, 5)) {
                    const double best = oracle::min_objective(d, gamma, mode == QualityMode::rb_modularity);
                    const double got = objective(e.configuration, g, gamma, mode);
                    worst = std::max(worst, (got - best) / std::max(std::abs(best), 1e-12));
                    ++samples;
                }
            }
        }
    }
    const double s = seconds_since(t0);
    return {worst <= objective_rel_gap && s < objective_budget_s,
            fmt::format("20 graphs x 2 modes, {} samples, worst relative gap {:.2e} (tol {}), {:.2f} s (budget {} s)",
                        samples, worst, objective_rel_gap, s, objective_budget_s)};
}

std::pair<bool, std::string> envelope_ok(const BlueRedFront& front) {
    if (front.entries.empty()) return {false, "empty front"};
    if (front.entries.front().interval_lo != 0.0) return {false, "first interval does not start at 0"};
    if (front.entries.back().interval_hi != front.gamma_max) return {false, "last interval does not end at gamma_max"};
    for (std::size_t e = 0; e < front.entries.size(); ++e) {
        const auto& entry = front.entries[e];
        if (!(entry.interval_lo <= entry.interval_hi)) return {false, "inverted interval"};
        if (e > 0 && entry.interval_lo != front.entries[e - 1].interval_hi) return {false, "gap or overlap"};
        for (double gamma : interval_samples(entry, 5)) {
            const double own = entry.objective(gamma);
            for (const auto& other : front.entries) {
                if (own > other.objective(gamma) + envelope_tolerance * std::max(1.0, std::abs(own))) {
                    return {false, fmt::format("entry {} beaten at gamma {}", e, gamma)};
                }
            }
        }
    }
    return {true, ""};
}

Outcome envelope_consistency() {
    std::mt19937_64 rng(99);
    std::size_t fronts = 0;
    std::string failure;
    auto check = [&](const BlueRedFront& f, const std::string& what) {
        ++fronts;
        const auto [ok, why] = envelope_ok(f);
        if (!ok && failure.empty()) failure = what + ": " + why;
    };
    for (int t = 0; t < 20; ++t) {
        const auto g = to_graph(oracle::random_dense_graph(8, 0.4, rng));
        for (auto mode : {QualityMode::cpm, QualityMode::rb_modularity}) {
            FrontOptions opt;
            opt.mode = mode;
            check(descending_triangulation(g, opt), fmt::format("random graph {}", t));
        }
    }
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        ExtractParams p;
        p.k = 8;
        check(extract(make_moons(300, 0.05, seed).features, p).front, "moons");
        p.k = blobs3_preset_k;
        check(extract(make_blobs_preset(seed).features, p).front, "blobs3");
        p.k = 6;
        p.front.mode = QualityMode::rb_modularity;
        check(extract(make_circles(300, 0.05, 0.5, seed).features, p).front, "circles rb");
    }
    return {failure.empty(), failure.empty() ? fmt::format("{} fronts, lower envelope at {:.0e}, intervals tile (0, gamma_max]",
                                                           fronts, envelope_tolerance)
                                             : failure};
}

Outcome reweighting_contract() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    std::size_t vertices = 0, saturated = 0;
    const std::pair<std::size_t, std::size_t> shapes[] = {{200, 20}, {300, 5}, {150, 3}, {500, 16}, {80, 30}};
    for (const auto& [n, k] : shapes) {
        std::vector<double> v(n * 3);
        for (auto& x : v) x = normal(rng);
        const auto raw = knn_build(FeatureMatrix(n, 3, v), k);
        ReweightReport report;
        sgtsne_reweight(raw, {}, &report);
        Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> rows = raw.adjacency();
        for (Eigen::Index i = 0; i < rows.outerSize(); ++i) {
            if (report.saturated[static_cast<std::size_t>(i)]) {
                ++saturated;
                continue;
            }
            const double sigma = report.sigmas[static_cast<std::size_t>(i)];
            double sum = 0.0;
            for (decltype(rows)::InnerIterator it(rows, i); it; ++it)
                sum += std::exp(-it.value() * it.value() / (2.0 * sigma * sigma));
            worst = std::max(worst, std::abs(sum - report.lambda));
            ++vertices;
        }
    }

    // De-skew: in-degree spread after reweighting against the raw distances
    // normalized over the same out-edges.
    bool deskew = true;
    std::string cvs;
    for (std::size_t k : {std::size_t{3}, std::size_t{10}}) {
        for (std::uint64_t seed : {0u, 1u, 2u}) {
            const auto raw = knn_build(make_density_pair(1000, seed).features, k);
            const AffinityGraph::Matrix transposed = raw.adjacency().transpose();
            const auto baseline = column_stochastic(AffinityGraph(transposed, {}));
            const double base_cv = coefficient_of_variation(baseline.out_degrees());
            const double rew_cv = coefficient_of_variation(sgtsne_reweight(raw, {}).in_degrees());
            deskew = deskew && rew_cv <= base_cv;
            cvs += fmt::format(" {:.3f}<={:.3f}", rew_cv, base_cv);
        }
    }
    return {worst <= sigma_residual && deskew && vertices > 0,
            fmt::format("{} vertices, max |sum - lambda| {:.2e} (tol {:.0e}), {} saturated; in-degree CV reweighted<=baseline:{}",
                        vertices, worst, sigma_residual, saturated, cvs)};
}

Outcome moons_recovery() {
    bool pass = true;
    std::string detail;
    std::string auto_detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = make_moons(1000, 0.05, seed);
        ExtractParams p;
        p.k = moons_k;
        p.front.seed = seed;
        const auto t0 = Clock::now();
        const auto set = extract_configurations(data.features, p);
        const double s = seconds_since(t0);
        const double best = best_ari(set, *data.labels);
        pass = pass && best >= moons_min_ari && s < moons_budget_s;
        detail += fmt::format(" s{}:{:.3f}/{:.1f}s", seed, best, s);

        p.k = std::nullopt;
        auto_detail += fmt::format(" {:.3f}", best_ari(extract_configurations(data.features, p), *data.labels));
    }
    std::printf("INFO  moons with automatic k=%zu, best ARI per seed:%s\n", auto_k(1000), auto_detail.c_str());
    return {pass, fmt::format("k={}, best ARI >= {} and < {} s per seed:{}", moons_k, moons_min_ari, moons_budget_s,
                              detail)};
}

Outcome fusion_necessity() {
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = make_blobs_preset(seed);
        ExtractParams p;
        p.k = blobs3_preset_k;
        p.front.seed = seed;
        const auto set = extract_configurations(data.features, p);
        const auto& truth = *data.labels;
        const double single = best_ari(set, truth);
        bool fused = false;
        std::string pair;
        for (std::size_t i = 0; i < set.size() && !fused; ++i) {
            for (std::size_t j = i + 1; j < set.size() && !fused; ++j) {
                if (ari(product_partition(set[i], set[j]), truth) == 1.0) {
                    fused = true;
                    pair = fmt::format("K{}xK{}", set[i].n_clusters(), set[j].n_clusters());
                }
            }
        }
        pass = pass && single < 1.0 && fused;
        detail += fmt::format(" s{}: m={} single {:.3f}, product {}", seed, set.size(), single, fused ? pair : "none");
    }
    return {pass, "preset blobs3," + detail};
}

Outcome rms_self_alignment() {
    std::mt19937_64 rng(31);
    const std::size_t n = 500;
    bool columns_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
        // Nested levels of 2, 4, 8 and 16 clusters plus an unrelated 4-cluster level.
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        auto level = [&](int k) {
            std::vector<Label> l(n);
            for (std::size_t r = 0; r < n; ++r) l[order[r]] = static_cast<Label>(r * static_cast<std::size_t>(k) / n) + 1;
            return relabel_contiguous(std::span<const Label>(l));
        };
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Configuration> levels{level(2), level(4), level(8), level(16)};
        std::shuffle(order.begin(), order.end(), rng);
        levels.insert(levels.begin() + 2, level(4));
        const ConfigurationSet train(levels, {0.1, 0.2, 0.3, 0.4, 0.8});

        // Split one cluster of a level whose size is unique, scramble every level's
        // labels, then swap the two 4-cluster levels.
        const std::size_t split_level = std::vector<std::size_t>{0, 3, 4}[static_cast<std::size_t>(trial % 3)];
        std::vector<Configuration> test_levels;
        for (std::size_t c = 0; c < levels.size(); ++c) {
            auto l = levels[c].labels();
            if (c == split_level) {
                const Label victim = l[0];
                int seen = 0;
                for (auto& x : l)
                    if (x == victim && (seen++ % 2 == 0)) x = levels[c].n_clusters() + 1;
            }
            test_levels.push_back(testing::permute_labels(Configuration(l), rng));
        }
        std::swap(test_levels[1], test_levels[2]);
        const ConfigurationSet test(test_levels, {1, 2, 3, 4, 5});

        const auto out = rms_align(train, test, select_anchors(n, 0.05, static_cast<std::uint64_t>(trial)));
        for (std::size_t c = 0; c < train.size(); ++c) {
            const auto& col = out.aligned.columns[c];
            columns_ok = columns_ok && ari(relabel_contiguous(std::span<const Label>(col)), train[c]) == 1.0;
        }
        columns_ok = columns_ok && out.pairs[1].test_col == 2 && out.pairs[2].test_col == 1;
    }

    // Assignment mass: Hungarian, spectral and exhaustive search on diagonal-dominant 4x6 tables.
    std::uniform_int_distribution<std::int64_t> diag(40, 80), off(0, 9);
    std::int64_t max_gap = 0;
    for (int t = 0; t < 100; ++t) {
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m(4, 6);
        std::vector<std::vector<double>> dense(4, std::vector<double>(6));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 6; ++j) {
                m(i, j) = i == j ? diag(rng) : off(rng);
                dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = static_cast<double>(m(i, j));
            }
        const auto c = ContingencyTable::from_counts(m);
        const auto best = static_cast<std::int64_t>(oracle::max_assignment_brute(dense));
        const auto h = hungarian_mapping(c).assignment_mass(c);
        const auto s = rms_mapping(c).assignment_mass(c);
        max_gap = std::max({max_gap, std::abs(h - s), std::abs(h - best)});
    }
    return {columns_ok && max_gap == 0,
            fmt::format("5 nested sets (order, labels permuted, one split): per-column ARI 1 {}; "
                        "100 diagonal-dominant 4x6 tables: max mass gap {} (hungarian, spectral, exhaustive)",
                        columns_ok ? "yes" : "no", max_gap)};
}

Outcome two_walk_laplacian_properties() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dim(1, 8);
    std::uniform_int_distribution<std::int64_t> count(0, 20);
    std::bernoulli_distribution sparse(0.4);
    double worst_sym = 0, worst_row = 0, worst_eig = 0, worst_res = 0;
    for (int t = 0; t < 100; ++t) {
        const int r = dim(rng), c = dim(rng);
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = sparse(rng) ? 0 : count(rng);
        if (m.sum() == 0) m(0, 0) = 1;
        const auto l = two_walk_laplacian(ContingencyTable::from_counts(m));
        worst_sym = std::max(worst_sym, (l.matrix - l.matrix.transpose()).cwiseAbs().maxCoeff());
        worst_row = std::max(worst_row, l.matrix.rowwise().sum().cwiseAbs().maxCoeff());
        std::vector<std::vector<double>> dense(l.size(), std::vector<double>(l.size()));
        for (std::size_t i = 0; i < l.size(); ++i)
            for (std::size_t j = 0; j < l.size(); ++j)
                dense[i][j] = l.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        worst_eig = std::min(worst_eig, static_cast<double>(oracle::jacobi(dense).values.front()));
        const auto f = fiedler_vector(l);
        worst_res = std::max(worst_res, (l.matrix * f.vector - f.eigenvalue * f.vector).norm());
    }
    const bool pass = worst_sym <= symmetry_tolerance && worst_row <= laplacian_tolerance &&
                      worst_eig >= -laplacian_tolerance && worst_res <= fiedler_residual;
    return {pass, fmt::format("100 tables: asymmetry {:.1e}, |row sum| {:.1e}, min eigenvalue {:.1e}, Fiedler residual {:.1e}",
                              worst_sym, worst_row, worst_eig, worst_res)};
}

struct Snapshot {
    std::map<std::string, std::string> files;
    nlohmann::json manifest;
};

Snapshot snapshot(const fs::path& dir) {
    Snapshot s;
    s.manifest = nlohmann::json::parse(testing::read_text(dir / "manifest.json"));
    std::set<std::string> skip{"manifest.json"};
    if (s.manifest.contains("nondeterministic_outputs"))
        for (const auto& p : s.manifest["nondeterministic_outputs"]) skip.insert(fs::path(p.get<std::string>()).filename().string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (!skip.count(name)) s.files[name] = testing::read_text(entry.path());
    }
    s.manifest.erase("timings_ms");
    return s;
}

Outcome cli_determinism() {
    testing::TempDir dir("acceptance_cli");
    const auto p = [&](const std::string& name) { return (dir / name).string(); };
    testing::write_text(dir / "seqs.fa", ">a\nACGTTGCAACGTAGCT\n>b\nTTTTGGGGCCCCAAAA\n>c\nACACACACGTGTGTGT\n");
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"synth", {"synth", "moons", "--n", "300", "--noise", "0.05", "--seed", "3", "--out", p("synth")}},
        {"graph", {"graph", "--input", p("synth") + "/data.csv", "--k", "8", "--out", p("graph")}},
        {"front", {"front", "--input", p("graph") + "/graph.mtx", "--seed", "3", "--out", p("front")}},
        {"front-csv", {"front", "--input", p("synth") + "/data.csv", "--k", "6", "--mode", "rb", "--out", p("front_csv")}},
        {"align", {"align", "--train", p("front") + "/configurations.csv", "--test", p("front_csv") + "/configurations.csv",
                   "--anchors", "auto", "--anchor-fraction", "0.05", "--seed", "3", "--out", p("align")}},
        {"tokens", {"tokens", "--input", p("align") + "/aligned.csv", "--out", p("tokens")}},
        {"bench", {"bench", "--kinds", "moons,blobs3", "--seeds", "0,1", "--n", "200", "--out", p("bench")}},
        {"kmers", {"kmers", "--input", p("seqs.fa"), "--length", "3", "--out", p("kmers")}},
    };
    std::string detail;
    bool pass = true;
    for (const auto& [name, args] : commands) {
        std::ostringstream out, err;
        std::vector<Snapshot> runs;
        for (int r = 0; r < 2; ++r) {
            if (cli::run(args, out, err) != 0) return {false, name + " failed: " + err.str()};
            runs.push_back(snapshot(args.back()));
        }
        const bool same = runs[0].files == runs[1].files && runs[0].manifest == runs[1].manifest;
        pass = pass && same && !runs[0].files.empty();
        detail += fmt::format(" {}:{}", name, same ? runs[0].files.size() : 0);
    }
    return {pass, "byte-identical reruns (files compared per command):" + detail};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"ari-oracle-equivalence", ari_oracle},
        {"partition-objective-oracle", objective_oracle},
        {"envelope-consistency", envelope_consistency},
        {"reweighting-contract", reweighting_contract},
        {"two-moons-recovery", moons_recovery},
        {"fusion-necessity", fusion_necessity},
        {"rms-self-alignment", rms_self_alignment},
        {"two-walk-laplacian", two_walk_laplacian_properties},
        {"cli-determinism", cli_determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
