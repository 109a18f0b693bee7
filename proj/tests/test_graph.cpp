#include <doctest.h>

#include <cmath>
#include <random>

#include "confmix/error.hpp"
#include "confmix/graph.hpp"
#include "support.hpp"

using namespace confmix;

namespace {

double weight(const AffinityGraph& g, std::ptrdiff_t i, std::ptrdiff_t j) { return g.adjacency().coeff(i, j); }

AffinityGraph directed(std::ptrdiff_t n, const std::vector<Eigen::Triplet<double, std::ptrdiff_t>>& entries) {
    AffinityGraph::Matrix m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    return AffinityGraph(std::move(m), {});
}

FeatureMatrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> v(n * d);
    for (auto& x : v) x = normal(rng);
    return FeatureMatrix(n, d, std::move(v));
}

} // namespace

TEST_CASE("auto_k follows ceil(log10 N) with a floor of three") {
    CHECK(auto_k(1000) == 3);
    CHECK(auto_k(65023) == 5);
    CHECK(auto_k(10) == 3);
    CHECK(auto_k(100001) == 6);
}

TEST_CASE("knn on four collinear points") {
    const FeatureMatrix x(4, 1, {0.0, 1.0, 2.0, 4.0});
    const auto g = knn_build(x, 1);
    CHECK(g.n_edges() == 4);
    CHECK(weight(g, 0, 1) == 1.0);
    CHECK(weight(g, 1, 0) == 1.0);  // tie with vertex 2 goes to the lower index
    CHECK(weight(g, 1, 2) == 0.0);
    CHECK(weight(g, 2, 1) == 1.0);
    CHECK(weight(g, 3, 2) == 2.0);
    CHECK(g.directed());
    CHECK_FALSE(g.stochastic());
}

TEST_CASE("knn out-degree is exactly k") {
    const auto x = random_points(120, 3, 4);
    const auto g = knn_build(x, 6);
    for (double d : g.out_degrees()) CHECK(d > 0.0);
    Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> rows = g.adjacency();
    for (Eigen::Index i = 0; i < rows.outerSize(); ++i) {
        CHECK(rows.row(i).nonZeros() == 6);
        CHECK(rows.coeff(i, i) == 0.0);
    }
    CHECK(knn_build(x).k() == auto_k(120));
}

TEST_CASE("knn rejects bad inputs") {
    const auto x = random_points(5, 2, 1);
    CHECK_THROWS_AS(knn_build(x, 5), DataError);
    CHECK_THROWS_AS(knn_build(x, 0), DataError);
    const FeatureMatrix dup(3, 1, {1.0, 1.0, 2.0});
    CHECK_THROWS_AS(knn_build(dup, 1), DataError);
}

TEST_CASE("column_stochastic examples") {
    const auto g = directed(3, {{1, 0, 2.0}, {2, 0, 3.0}});
    const auto s = column_stochastic(g);
    CHECK(s.stochastic());
    CHECK(weight(s, 1, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(weight(s, 2, 0) == doctest::Approx(0.6).epsilon(1e-15));

    const auto again = column_stochastic(s);
    CHECK((again.adjacency() - s.adjacency()).norm() <= 1e-12);

    const auto eq = column_stochastic(directed(5, {{1, 0, 0.7}, {2, 0, 0.7}, {3, 0, 0.7}, {4, 0, 0.7}}));
    for (std::ptrdiff_t i = 1; i < 5; ++i) CHECK(weight(eq, i, 0) == doctest::Approx(0.25).epsilon(1e-15));

    const auto knn = column_stochastic(knn_build(random_points(50, 2, 9), 4));
    for (double d : knn.in_degrees()) {
        if (d != 0.0) CHECK(std::abs(d - 1.0) <= 1e-9);
    }
}

TEST_CASE("solve_sigma closed forms") {
    ReweightParams p;
    p.bisection_tolerance = 1e-12;
    p.lambda = 15.0;
    const std::vector<double> equal(20, 1.0);
    auto sol = solve_sigma(equal, p);
    CHECK_FALSE(sol.saturated);
    CHECK(sol.sigma == doctest::Approx(1.0 / std::sqrt(2.0 * std::log(20.0 / 15.0))).epsilon(1e-9));
    CHECK(sol.sigma == doctest::Approx(1.318344).epsilon(1e-6));

    p.lambda = 0.5;
    const std::vector<double> one{1.0};
    sol = solve_sigma(one, p);
    CHECK(sol.sigma == doctest::Approx(0.84932).epsilon(1e-5));

    p.lambda = 15.0;
    const std::vector<double> five{1, 2, 3, 4, 5};
    CHECK(solve_sigma(five, p).saturated);
}

TEST_CASE("solve_sigma errors") {
    ReweightParams p;
    CHECK_THROWS_AS(solve_sigma(std::vector<double>{}, p), DataError);
    CHECK_THROWS_AS(solve_sigma(std::vector<double>{1.0, 0.0}, p), DataError);
    p.lambda = 0.5;
    CHECK_THROWS_AS(p.validate(), UsageError);
}

TEST_CASE("kernel sum increases with sigma") {
    const std::vector<double> d{0.3, 1.0, 2.5, 4.0};
    double prev = 0.0;
    for (double s = 0.05; s < 50.0; s *= 1.3) {
        const double v = gaussian_kernel_sum(d, s);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("effective lambda clamps to k - 1") {
    CHECK(effective_lambda(15.0, 5) == 4.0);
    CHECK(effective_lambda(15.0, 20) == 15.0);
    CHECK(effective_lambda(3.0, 10) == 3.0);
}

TEST_CASE("reweighting normalizes out-weights and preserves order") {
    const auto raw = knn_build(random_points(200, 2, 17), 20);
    ReweightReport report;
    const auto g = sgtsne_reweight(raw, {}, &report);
    CHECK(report.lambda == 15.0);
    const auto out = g.out_degrees();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!report.saturated[i]) CHECK(std::abs(out[i] - 1.0) <= 1e-6);
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> d = raw.adjacency();
    Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> w = g.adjacency();
    for (Eigen::Index i = 0; i < d.outerSize(); ++i) {
        std::vector<std::pair<double, double>> pairs;
        for (decltype(d)::InnerIterator it(d, i); it; ++it) pairs.emplace_back(it.value(), w.coeff(i, it.col()));
        for (const auto& [d1, w1] : pairs)
            for (const auto& [d2, w2] : pairs)
                if (d1 < d2) CHECK(w1 > w2);
    }
}

TEST_CASE("equal distances give uniform weights") {
    // Vertex 0 sits at the center of a regular polygon.
    std::vector<double> v{0.0, 0.0};
    for (int i = 0; i < 6; ++i) {
        v.push_back(std::cos(i * M_PI / 3.0));
        v.push_back(std::sin(i * M_PI / 3.0));
    }
    const FeatureMatrix x(7, 2, v);
    ReweightParams p;
    p.lambda = 3.0;
    const auto g = sgtsne_reweight(knn_build(x, 6), p);
    for (std::ptrdiff_t j = 1; j < 7; ++j) CHECK(weight(g, 0, j) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
}

TEST_CASE("symmetrize examples") {
    const auto g = directed(2, {{0, 1, 0.4}});
    const auto s = symmetrize(g);
    CHECK(weight(s, 0, 1) == doctest::Approx(0.2));
    CHECK(weight(s, 1, 0) == doctest::Approx(0.2));
    CHECK_FALSE(s.directed());

    const auto twice = symmetrize(s);
    CHECK((twice.adjacency() - s.adjacency()).norm() == 0.0);

    const auto u = symmetrize_union(directed(3, {{0, 1, 0.4}, {1, 0, 0.1}, {1, 2, 0.3}}));
    CHECK(weight(u, 0, 1) == 0.4);
    CHECK(weight(u, 2, 1) == 0.3);
}

TEST_CASE("graph validation") {
    CHECK_THROWS_AS(directed(2, {{0, 0, 1.0}}), DataError);
    CHECK_THROWS_AS(directed(2, {{0, 1, -1.0}}), DataError);
    const std::vector<WeightedEdge> bad{{0, 3, 1.0}};
    CHECK_THROWS_AS(undirected_graph(3, bad), DataError);
}

TEST_CASE("graph round-trips through Matrix Market") {
    testing::TempDir dir("graph");
    const auto g = symmetrize(sgtsne_reweight(knn_build(random_points(60, 2, 2), 5), {}));
    save_graph(g, dir / "g.mtx");
    const auto back = load_graph(dir / "g.mtx");
    CHECK((back.adjacency() - g.adjacency()).norm() == 0.0);
    CHECK(back.k() == g.k());
    CHECK(back.lambda() == g.lambda());
    CHECK(back.flags().symmetrized);
    CHECK(back.flags().reweighted);
    CHECK(testing::read_text(dir / "g.mtx").rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);

    testing::write_text(dir / "bad.mtx", "%%MatrixMarket matrix array real general\n2 2\n");
    CHECK_THROWS_AS(load_graph(dir / "bad.mtx"), FormatError);
}
