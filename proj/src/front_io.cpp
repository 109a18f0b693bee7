#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "confmix/cluster.hpp"
#include "confmix/error.hpp"

namespace confmix {

void save_front_json(const BlueRedFront& front, const std::filesystem::path& path) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& e : front.entries) {
        entries.push_back({
            {"gamma_star", e.gamma_star},
            {"interval", {e.interval_lo, e.interval_hi}},
            {"n_clusters", e.configuration.n_clusters()},
            {"attraction", e.attraction},
            {"repulsion", e.repulsion},
        });
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << entries.dump(2) << '\n';
}

void save_lineage_dot(const ConfigurationSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "digraph lineage {\n  rankdir=TB;\n  node [shape=circle];\n";
    for (std::size_t level = 0; level < set.size(); ++level) {
        const auto sizes = set[level].cluster_sizes();
        out << fmt::format("  subgraph level{} {{\n    rank=same;\n", level + 1);
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            out << fmt::format("    \"L{}C{}\" [label=\"{}\\n{}\"];\n", level + 1, c + 1, c + 1, sizes[c]);
        }
        out << "  }\n";
    }
    for (std::size_t level = 0; level + 1 < set.size(); ++level) {
        const ContingencyTable t = contingency(set[level], set[level + 1]);
        for (Eigen::Index p = 0; p < t.counts.rows(); ++p) {
            for (Eigen::Index q = 0; q < t.counts.cols(); ++q) {
                if (t.counts(p, q) == 0) continue;
                out << fmt::format("  \"L{}C{}\" -> \"L{}C{}\" [label=\"{}\"];\n", level + 1, p + 1, level + 2, q + 1,
                                   t.counts(p, q));
            }
        }
    }
    out << "}\n";
}

} // namespace confmix
