#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "confmix/error.hpp"
#include "confmix/graph.hpp"

namespace confmix {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p.replace_extension(".json");
    return p;
}

} // namespace

void save_graph(const AffinityGraph& g, const std::filesystem::path& path) {
    // Row-major order so the file reads as per-vertex edge lists.
    Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t> rows = g.adjacency();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << fmt::format("{} {} {}\n", g.n_vertices(), g.n_vertices(), g.n_edges());
    for (Eigen::Index i = 0; i < rows.outerSize(); ++i) {
        for (decltype(rows)::InnerIterator it(rows, i); it; ++it) {
            out << fmt::format("{} {} {}\n", it.row() + 1, it.col() + 1, it.value());
        }
    }
    if (!out) throw DataError("failed writing " + path.string());

    const nlohmann::ordered_json header = {
        {"n_vertices", g.n_vertices()},     {"k", g.k()},
        {"lambda", g.lambda()},             {"stochastic", g.flags().stochastic},
        {"reweighted", g.flags().reweighted}, {"symmetrized", g.flags().symmetrized},
    };
    std::ofstream side(sidecar_path(path), std::ios::binary);
    side << header.dump(2) << '\n';
    if (!side) throw DataError("failed writing " + sidecar_path(path).string());
}

AffinityGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("%%MatrixMarket matrix coordinate real general")) {
        throw FormatError(path.string() + ": expected a real general coordinate Matrix Market header");
    }
    while (std::getline(in, line) && (line.empty() || line.front() == '%')) {
    }
    std::size_t rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> nnz) || rows != cols) {
            throw FormatError(path.string() + ": bad size line '" + line + "'");
        }
    }
    std::vector<Eigen::Triplet<double, std::ptrdiff_t>> triplets;
    triplets.reserve(nnz);
    for (std::size_t e = 0; e < nnz; ++e) {
        if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated entry list");
        std::istringstream entry(line);
        std::size_t i = 0, j = 0;
        std::string value_text;
        if (!(entry >> i >> j >> value_text) || i < 1 || j < 1 || i > rows || j > cols) {
            throw FormatError(fmt::format("{}: bad entry line {}: '{}'", path.string(), e + 1, line));
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
        if (ec != std::errc() || ptr != value_text.data() + value_text.size()) {
            throw FormatError(fmt::format("{}: bad value on entry line {}", path.string(), e + 1));
        }
        triplets.emplace_back(static_cast<std::ptrdiff_t>(i - 1), static_cast<std::ptrdiff_t>(j - 1), value);
    }
    AffinityGraph::Matrix adjacency(static_cast<std::ptrdiff_t>(rows), static_cast<std::ptrdiff_t>(cols));
    adjacency.setFromTriplets(triplets.begin(), triplets.end());

    AffinityGraph::Flags flags;
    std::size_t k = 0;
    double lambda = 0.0;
    const auto side_path = sidecar_path(path);
    if (std::filesystem::exists(side_path)) {
        std::ifstream side(side_path);
        nlohmann::json header;
        try {
            side >> header;
            k = header.value("k", std::size_t{0});
            lambda = header.value("lambda", 0.0);
            flags.stochastic = header.value("stochastic", false);
            flags.reweighted = header.value("reweighted", false);
            flags.symmetrized = header.value("symmetrized", false);
            if (header.value("n_vertices", rows) != rows) {
                throw FormatError(side_path.string() + ": n_vertices disagrees with the matrix");
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(side_path.string() + ": " + e.what());
        }
        flags.directed = !flags.symmetrized;
    }
    return AffinityGraph(std::move(adjacency), flags, k, lambda);
}

} // namespace confmix
