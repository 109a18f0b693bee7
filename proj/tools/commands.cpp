#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cli.hpp"
#include "confmix/align.hpp"
#include "confmix/cluster.hpp"
#include "confmix/datasets.hpp"
#include "confmix/error.hpp"
#include "confmix/log.hpp"
#include "confmix/parallel.hpp"

namespace confmix::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return fmt::format("{:016x}", h);
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// One manifest per run, written next to the outputs.
class Manifest {
public:
    explicit Manifest(std::string command) : start_(Clock::now()) {
        json_["command"] = std::move(command);
        json_["parameters"] = Json::object();
        json_["seeds"] = Json::array();
        json_["inputs"] = Json::array();
        json_["outputs"] = Json::array();
        json_["timings_ms"] = Json::object();
    }

    template <typename T>
    void param(const std::string& key, const T& value) {
        json_["parameters"][key] = value;
    }
    void seed(std::uint64_t s) { json_["seeds"].push_back(s); }
    void input(const fs::path& path) {
        json_["inputs"].push_back({{"path", path.string()}, {"fnv1a64", fnv1a_file(path)}});
    }
    void output(const fs::path& path, bool deterministic = true) {
        json_["outputs"].push_back(path.filename().string());
        if (!deterministic) json_["nondeterministic_outputs"].push_back(path.filename().string());
    }
    void timing(const std::string& step, double ms) { json_["timings_ms"][step] = ms; }

    void write(const fs::path& dir) {
        json_["timings_ms"]["total"] = elapsed_ms(start_);
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw DataError("cannot write manifest in " + dir.string());
        out << json_.dump(2) << '\n';
    }

private:
    Json json_;
    Clock::time_point start_;
};

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

std::optional<std::size_t> parse_k(const std::string& text) {
    if (text == "auto") return std::nullopt;
    std::size_t k = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
    if (ec != std::errc{} || end != text.data() + text.size() || k == 0) {
        throw UsageError(fmt::format("--k must be 'auto' or a positive integer, got '{}'", text));
    }
    return k;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::vector<std::string> header_cells(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    return cells;
}

bool is_number(const std::string& cell) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    return ec == std::errc{} && end == cell.data() + cell.size() && !cell.empty();
}

struct TableOptions {
    std::string header = "auto";
    std::string label_column = "auto";
};

/// Feature CSV with optional header and label column; "auto" detects both from the first line.
LabeledDataset read_table(const fs::path& path, const TableOptions& options) {
    const auto first = header_cells(path);
    CsvOptions csv;
    if (options.header == "auto") {
        csv.has_header = std::any_of(first.begin(), first.end(), [](const std::string& c) { return !is_number(c); });
    } else if (options.header == "yes" || options.header == "no") {
        csv.has_header = options.header == "yes";
    } else {
        throw UsageError("--header must be auto, yes or no");
    }

    if (options.label_column == "auto") {
        if (csv.has_header) {
            const auto it = std::find(first.begin(), first.end(), "label");
            if (it != first.end()) csv.label_column = static_cast<std::size_t>(it - first.begin());
        }
    } else if (options.label_column == "last") {
        csv.label_column = first.size() - 1;
    } else if (options.label_column != "none") {
        std::size_t col = 0;
        const auto& t = options.label_column;
        const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), col);
        if (ec != std::errc{} || end != t.data() + t.size() || col == 0) {
            throw UsageError("--label-column must be auto, none, last or a 1-based column index");
        }
        csv.label_column = col - 1;
    }
    return load_csv(path, csv);
}

void add_table_options(CLI::App* cmd, TableOptions& t) {
    cmd->add_option("--header", t.header, "Header row: auto, yes or no")->capture_default_str();
    cmd->add_option("--label-column", t.label_column, "Label column: auto, none, last or 1-based index")
        ->capture_default_str();
}

struct GraphOptions {
    std::string k = "auto";
    double lambda = 15.0;
    bool no_reweight = false;
    std::string symmetrize = "mean";
};

void add_graph_options(CLI::App* cmd, GraphOptions& g) {
    cmd->add_option("--k", g.k, "Neighbors per vertex, or auto = max(3, ceil(log10 N))")->capture_default_str();
    cmd->add_option("--lambda", g.lambda, "Reweighting kernel sum")->capture_default_str();
    cmd->add_flag("--no-reweight", g.no_reweight, "Column-normalize raw distances instead of reweighting");
    cmd->add_option("--symmetrize", g.symmetrize, "mean or union")->capture_default_str();
}

ExtractParams extract_params(const GraphOptions& g) {
    ExtractParams p;
    p.k = parse_k(g.k);
    p.reweight = !g.no_reweight;
    p.reweight_params.lambda = g.lambda;
    if (g.symmetrize == "mean") {
        p.symmetrization = Symmetrization::mean;
    } else if (g.symmetrize == "union") {
        p.symmetrization = Symmetrization::union_max;
    } else {
        throw UsageError("--symmetrize must be mean or union");
    }
    return p;
}

void record_graph_params(Manifest& m, const GraphOptions& g, const AffinityGraph& graph) {
    m.param("k", graph.k());
    m.param("k_requested", g.k);
    m.param("lambda", g.lambda);
    m.param("lambda_effective", graph.lambda());
    m.param("reweight", !g.no_reweight);
    m.param("symmetrize", g.symmetrize);
}

LabeledDataset synthesize(const std::string& kind, std::size_t n, double noise, double factor, std::size_t centers,
                          double stdev, std::uint64_t seed) {
    if (kind == "moons") return make_moons(n, noise, seed);
    if (kind == "circles") return make_circles(n, noise, factor, seed);
    if (kind == "blobs3") return make_blobs_preset(seed);
    if (kind == "density") return make_density_pair(n, seed);
    if (kind == "blobs") {
        if (centers == 0) throw UsageError("--centers must be positive");
        std::vector<std::vector<double>> c;
        for (std::size_t i = 0; i < centers; ++i) {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(centers);
            c.push_back({5.0 * std::cos(t), 5.0 * std::sin(t)});
        }
        return make_blobs(n, c, std::vector<double>(centers, stdev), seed);
    }
    throw UsageError(fmt::format("unknown dataset kind '{}' (moons, circles, blobs, blobs3, density)", kind));
}

struct Common {
    std::string out;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out, "Output directory")->required();
    cmd->add_option("--threads", c.threads, "Worker thread cap (0 = hardware)");
}

void apply_threads(const Common& c) {
    set_max_threads(c.threads);
}

// ---- commands ----

struct SynthArgs {
    Common common;
    std::string kind;
    std::size_t n = 1000;
    double noise = 0.05;
    double factor = 0.5;
    std::size_t centers = 3;
    double stdev = 1.0;
    std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
    const fs::path dir(a.common.out);
    prepare_out_dir(dir);
    Manifest m("synth");
    m.param("kind", a.kind);
    m.param("n", a.n);
    m.param("noise", a.noise);
    m.param("factor", a.factor);
    m.param("centers", a.centers);
    m.param("std", a.stdev);
    m.seed(a.seed);

    const auto t0 = Clock::now();
    const LabeledDataset data = synthesize(a.kind, a.n, a.noise, a.factor, a.centers, a.stdev, a.seed);
    m.timing("generate", elapsed_ms(t0));
    const fs::path csv = dir / "data.csv";
    save_csv(data, csv, true);
    m.output(csv);
    m.write(dir);
    out << fmt::format("synth: {} with {} samples x {} features -> {}\n", data.name, data.features.n_samples(),
                       data.features.n_features(), csv.string());
}

struct GraphArgs {
    Common common;
    std::string input;
    TableOptions table;
    GraphOptions graph;
};

void cmd_graph(const GraphArgs& a, std::ostream& out) {
    apply_threads(a.common);
    const fs::path dir(a.common.out);
    prepare_out_dir(dir);
    Manifest m("graph");
    m.input(a.input);

    const auto t0 = Clock::now();
    const LabeledDataset data = read_table(a.input, a.table);
    const AffinityGraph g = build_clustering_graph(data.features, extract_params(a.graph));
    m.timing("build", elapsed_ms(t0));
    record_graph_params(m, a.graph, g);

    const fs::path mtx = dir / "graph.mtx";
    save_graph(g, mtx);
    m.output(mtx);
    m.output(fs::path(mtx).replace_extension(".json"));
    m.write(dir);
    out << fmt::format("k={}\n", g.k());
    out << fmt::format("graph: {} vertices, {} stored edges, lambda={} -> {}\n", g.n_vertices(), g.n_edges(),
                       g.lambda(), mtx.string());
}

struct FrontArgs {
    Common common;
    std::string input;
    TableOptions table;
    GraphOptions graph;
    std::string mode = "cpm";
    std::uint64_t seed = 0;
    bool cold_start = false;
    std::size_t restarts = FrontOptions{}.restarts;
    std::size_t max_calls = FrontOptions{}.max_leiden_calls;
};

void cmd_front(const FrontArgs& a, std::ostream& out) {
    apply_threads(a.common);
    const fs::path dir(a.common.out);
    prepare_out_dir(dir);
    Manifest m("front");
    m.input(a.input);
    m.seed(a.seed);
    m.param("mode", std::string(to_string(parse_quality_mode(a.mode))));
    m.param("warm_start", !a.cold_start);
    m.param("restarts", a.restarts);
    m.param("max_leiden_calls", a.max_calls);

    const auto t0 = Clock::now();
    const fs::path input(a.input);
    const bool is_graph = input.extension() == ".mtx";
    const AffinityGraph g = is_graph ? load_graph(input)
                                     : build_clustering_graph(read_table(input, a.table).features, extract_params(a.graph));
    if (!is_graph) record_graph_params(m, a.graph, g);
    m.timing("graph", elapsed_ms(t0));

    FrontOptions opts;
    opts.mode = parse_quality_mode(a.mode);
    opts.seed = a.seed;
    opts.warm_start = !a.cold_start;
    opts.restarts = a.restarts;
    opts.max_leiden_calls = a.max_calls;
    const auto t1 = Clock::now();
    const BlueRedFront front = descending_triangulation(g, opts);
    const ConfigurationSet set = front_configurations(front);
    m.timing("front", elapsed_ms(t1));

    const fs::path csv = dir / "configurations.csv";
    const fs::path json = dir / "front.json";
    const fs::path dot = dir / "lineage.dot";
    save_configuration_set(set, csv);
    save_front_json(front, json);
    save_lineage_dot(set, dot);
    m.output(csv);
    m.output(json);
    m.output(dot);
    m.param("gamma_max", front.gamma_max);
    m.param("leiden_calls", front.leiden_calls);
    m.write(dir);

    std::string sizes;
    for (std::size_t i = 0; i < std::min<std::size_t>(set.size(), 12); ++i) {
        sizes += fmt::format("{}{}", i ? "," : "", set[i].n_clusters());
    }
    if (set.size() > 12) sizes += ",...";
    out << fmt::format("front: {} entries, m={} configurations (clusters {}), gamma_max={} -> {}\n",
                       front.entries.size(), set.size(), sizes, front.gamma_max, csv.string());
}

struct AlignArgs {
    Common common;
    std::string train;
    std::string test;
    std::string anchors;
    double anchor_fraction = 0.001;
    double theta = ScoreParams{}.theta;
    std::uint64_t seed = 0;
};

void cmd_align(const AlignArgs& a, std::ostream& out) {
    const fs::path dir(a.common.out);
    prepare_out_dir(dir);
    Manifest m("align");
    m.input(a.train);
    m.input(a.test);
    m.param("theta", a.theta);
    m.param("anchor_fraction", a.anchor_fraction);

    const ConfigurationSet train = load_configuration_set(a.train);
    const ConfigurationSet test = load_configuration_set(a.test);
    AnchorSet anchors;
    if (a.anchors == "auto") {
        if (train.n_samples() != test.n_samples()) {
            throw UsageError("--anchors auto needs train and test over the same samples; pass an anchors file");
        }
        m.seed(a.seed);
        anchors = select_anchors(train.n_samples(), a.anchor_fraction, a.seed);
        const fs::path anchors_out = dir / "anchors.json";
        save_anchors(anchors, anchors_out);
        m.output(anchors_out);
    } else {
        m.input(a.anchors);
        anchors = load_anchors(a.anchors);
    }
    m.param("anchors", a.anchors);
    m.param("n_anchors", anchors.size());

    const auto t0 = Clock::now();
    const RmsAlignment result = rms_align(train, test, anchors, a.theta);
    m.timing("align", elapsed_ms(t0));

    const fs::path csv = dir / "aligned.csv";
    const fs::path json = dir / "alignment.json";
    write_label_table(result.aligned, csv);
    save_alignment_json(result, json);
    m.output(csv);
    m.output(json);
    m.write(dir);
    out << fmt::format("align: {} pairs, {} surplus, {} anchors, theta={} -> {}\n", result.pairs.size(),
                       result.surplus.size(), anchors.size(), a.theta, csv.string());
}

struct BenchArgs {
    Common common;
    std::string kinds = "moons,circles,blobs3";
    std::string seeds = "0,1,2,3,4";
    std::size_t n = 1000;
    double noise = 0.05;
    double factor = 0.5;
    std::string mode = "cpm";
    GraphOptions graph;
};

void cmd_bench(const BenchArgs& a, std::ostream& out) {
    apply_threads(a.common);
    const fs::path dir(a.common.out);
    prepare_out_dir(dir);
    Manifest m("bench");
    m.param("kinds", a.kinds);
    m.param("n", a.n);
    m.param("noise", a.noise);
    m.param("factor", a.factor);
    m.param("mode", std::string(to_string(parse_quality_mode(a.mode))));
    m.param("k_requested", a.graph.k);
    m.param("lambda", a.graph.lambda);
    m.param("reweight", !a.graph.no_reweight);

    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(a.seeds)) {
        std::uint64_t v = 0;
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || end != s.data() + s.size()) throw UsageError("--seeds must list integers");
        seeds.push_back(v);
        m.seed(v);
    }
    const auto kinds = split_list(a.kinds);
    if (kinds.empty() || seeds.empty()) throw UsageError("bench needs at least one kind and one seed");

    std::string table = "kind,seed,n,k,m,best_ari,best_level,best_clusters\n";
    std::string runtime = "kind,seed,wall_ms\n";
    std::string pretty = fmt::format("{:<10} {:>5} {:>6} {:>4} {:>5} {:>9} {:>9} {:>10}\n", "dataset", "seed", "n", "k",
                                     "m", "best_ari", "clusters", "wall_ms");
    for (const auto& kind : kinds) {
        for (std::uint64_t seed : seeds) {
            const LabeledDataset data = synthesize(kind, a.n, a.noise, a.factor, 3, 1.0, seed);
            ExtractParams p = extract_params(a.graph);
            if (!p.k && kind == "blobs3") p.k = blobs3_preset_k;
            p.front.mode = parse_quality_mode(a.mode);
            p.front.seed = seed;

            const auto t0 = Clock::now();
            const Extraction ex = extract(data.features, p);
            const double ms = elapsed_ms(t0);

            double best = -1.0;
            std::size_t level = 0;
            for (std::size_t i = 0; i < ex.configurations.size(); ++i) {
                const double v = ari(ex.configurations[i], *data.labels);
                if (v > best) {
                    best = v;
                    level = i;
                }
            }
            const Label clusters = ex.configurations.empty() ? 0 : ex.configurations[level].n_clusters();
            const std::size_t n = data.features.n_samples();
            table += fmt::format("{},{},{},{},{},{:.6f},{},{}\n", kind, seed, n, ex.graph.k(), ex.configurations.size(),
                                 best, level + 1, clusters);
            runtime += fmt::format("{},{},{:.1f}\n", kind, seed, ms);
            pretty += fmt::format("{:<10} {:>5} {:>6} {:>4} {:>5} {:>9.4f} {:>9} {:>10.1f}\n", kind, seed, n,
                                  ex.graph.k(), ex.configurations.size(), best, clusters, ms);
            m.timing(fmt::format("{}/{}", kind, seed), ms);
        }
    }

    auto write = [&](const std::string& name, const std::string& text, bool deterministic) {
        const fs::path path = dir / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DataError("cannot write " + path.string());
        f << text;
        m.output(path, deterministic);
    };
    write("bench.csv", table, true);
    write("bench_runtime.csv", runtime, false);
    write("bench.txt", pretty, false);
    m.write(dir);
    out << pretty;
}

struct TokensArgs {
    Common common;
    std::string input;
};

void cmd_tokens(const TokensArgs& a, std::ostream& out) {
    const fs::path dir(a.common.out);
    prepare_out_dir(dir);
    Manifest m("tokens");
    m.input(a.input);

    const LabelTable table = read_label_table(a.input);
    if (table.columns.empty()) throw DataError(a.input + ": no configurations");
    Json cardinalities = Json::array();
    for (const auto& col : table.columns) cardinalities.push_back(*std::max_element(col.begin(), col.end()));
    const Json schema = {{"m", table.columns.size()},
                         {"n_samples", table.columns.front().size()},
                         {"cardinalities", cardinalities},
                         {"gammas", table.gammas}};

    const fs::path csv = dir / "tokens.csv";
    const fs::path json = dir / "schema.json";
    write_label_table(table, csv);
    std::ofstream f(json, std::ios::binary);
    if (!f) throw DataError("cannot write " + json.string());
    f << schema.dump(2) << '\n';
    f.close();
    m.output(csv);
    m.output(json);
    m.write(dir);
    out << fmt::format("tokens: m={} over {} samples -> {}\n", table.columns.size(), table.columns.front().size(),
                       csv.string());
}

struct KmersArgs {
    Common common;
    std::string input;
    std::size_t length = 7;
};

void cmd_kmers(const KmersArgs& a, std::ostream& out) {
    const fs::path dir(a.common.out);
    prepare_out_dir(dir);
    Manifest m("kmers");
    m.input(a.input);
    m.param("length", a.length);

    const auto records = read_fasta(a.input);
    const LabeledDataset data(kmer_matrix(records, a.length), std::nullopt, fs::path(a.input).stem().string());
    const fs::path csv = dir / "kmers.csv";
    save_csv(data, csv, false);
    m.output(csv);
    m.write(dir);
    out << fmt::format("kmers: {} sequences x {} {}-mers -> {}\n", records.size(), data.features.n_features(),
                       a.length, csv.string());
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    init_logging();

    CLI::App app{"Multi-resolution clustering configurations: extraction, alignment and export"};
    app.name("confmix");
    app.require_subcommand(1);

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    c_synth->add_option("kind", synth.kind, "moons, circles, blobs, blobs3 or density")->required();
    c_synth->add_option("--n", synth.n, "Number of samples")->capture_default_str();
    c_synth->add_option("--noise", synth.noise, "Gaussian noise (moons, circles)")->capture_default_str();
    c_synth->add_option("--factor", synth.factor, "Inner radius (circles)")->capture_default_str();
    c_synth->add_option("--centers", synth.centers, "Number of centers (blobs)")->capture_default_str();
    c_synth->add_option("--std", synth.stdev, "Blob standard deviation (blobs)")->capture_default_str();
    c_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    add_common(c_synth, synth.common);

    GraphArgs graph;
    auto* c_graph = app.add_subcommand("graph", "Build the reweighted kNN clustering graph");
    c_graph->add_option("--input", graph.input, "Feature CSV")->required()->check(CLI::ExistingFile);
    add_table_options(c_graph, graph.table);
    add_graph_options(c_graph, graph.graph);
    add_common(c_graph, graph.common);

    FrontArgs front;
    auto* c_front = app.add_subcommand("front", "Extract configurations along the resolution front");
    c_front->add_option("--input", front.input, "Graph (.mtx) or feature CSV")->required()->check(CLI::ExistingFile);
    c_front->add_option("--mode", front.mode, "cpm or rb")->capture_default_str();
    c_front->add_option("--seed", front.seed, "Random seed")->capture_default_str();
    c_front->add_flag("--cold-start", front.cold_start, "Start every crossing run from singletons");
    c_front->add_option("--restarts", front.restarts, "Extra runs from singletons per crossing")->capture_default_str();
    c_front->add_option("--max-leiden-calls", front.max_calls, "Budget of clustering runs")->capture_default_str();
    add_table_options(c_front, front.table);
    add_graph_options(c_front, front.graph);
    add_common(c_front, front.common);

    AlignArgs align;
    auto* c_align = app.add_subcommand("align", "Align test configurations to train configurations");
    c_align->add_option("--train,--input", align.train, "Train configuration CSV")->required()->check(CLI::ExistingFile);
    c_align->add_option("--test", align.test, "Test configuration CSV")->required()->check(CLI::ExistingFile);
    c_align->add_option("--anchors", align.anchors, "Anchors JSON, or auto to sample them")->required();
    c_align->add_option("--anchor-fraction", align.anchor_fraction, "Fraction of samples used as anchors")
        ->capture_default_str();
    c_align->add_option("--theta", align.theta, "Cluster-count penalty in the pairing score")->capture_default_str();
    c_align->add_option("--seed", align.seed, "Seed for --anchors auto")->capture_default_str();
    add_common(c_align, align.common);

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "ARI and runtime of extraction on synthetic datasets");
    c_bench->add_option("--kinds", bench.kinds, "Comma-separated dataset kinds")->capture_default_str();
    c_bench->add_option("--seeds", bench.seeds, "Comma-separated seeds")->capture_default_str();
    c_bench->add_option("--n", bench.n, "Samples per dataset (blobs3 is fixed)")->capture_default_str();
    c_bench->add_option("--noise", bench.noise, "Noise for moons and circles")->capture_default_str();
    c_bench->add_option("--factor", bench.factor, "Inner radius for circles")->capture_default_str();
    c_bench->add_option("--mode", bench.mode, "cpm or rb")->capture_default_str();
    add_graph_options(c_bench, bench.graph);
    add_common(c_bench, bench.common);

    TokensArgs tokens;
    auto* c_tokens = app.add_subcommand("tokens", "Export configurations and their schema for fusion");
    c_tokens->add_option("--input", tokens.input, "Configuration or aligned CSV")->required()->check(CLI::ExistingFile);
    add_common(c_tokens, tokens.common);

    KmersArgs kmers;
    auto* c_kmers = app.add_subcommand("kmers", "Count k-mers of FASTA sequences");
    c_kmers->add_option("--input", kmers.input, "FASTA file")->required()->check(CLI::ExistingFile);
    c_kmers->add_option("--length", kmers.length, "k-mer length")->capture_default_str();
    add_common(c_kmers, kmers.common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }

    try {
        if (*c_synth) cmd_synth(synth, out);
        else if (*c_graph) cmd_graph(graph, out);
        else if (*c_front) cmd_front(front, out);
        else if (*c_align) cmd_align(align, out);
        else if (*c_bench) cmd_bench(bench, out);
        else if (*c_tokens) cmd_tokens(tokens, out);
        else if (*c_kmers) cmd_kmers(kmers, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::data);
    }
    return 0;
}

} // namespace confmix::cli
