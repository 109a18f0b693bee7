#include "confmix/datasets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "confmix/error.hpp"

namespace confmix {

LabeledDataset::LabeledDataset(FeatureMatrix f, std::optional<Configuration> l, std::string n)
    : features(std::move(f)), labels(std::move(l)), name(std::move(n)) {
    if (labels && labels->size() != features.n_samples()) {
        throw DataError(fmt::format("dataset '{}' has {} samples but {} labels", name, features.n_samples(),
                                    labels->size()));
    }
}

namespace {

void check_noise(double noise) {
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        throw UsageError(fmt::format("noise must be a finite non-negative number, got {}", noise));
    }
}

void add_noise(std::vector<double>& values, double noise, std::mt19937_64& rng) {
    if (noise == 0.0) return;
    std::normal_distribution<double> gauss(0.0, noise);
    for (double& v : values) v += gauss(rng);
}

/// linspace(0, stop, count) with or without the endpoint.
double grid(std::size_t i, std::size_t count, double stop, bool endpoint) {
    if (endpoint) return count > 1 ? stop * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
    return stop * static_cast<double>(i) / static_cast<double>(count);
}

} // namespace

LabeledDataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
    if (n < 4) throw UsageError(fmt::format("moons needs at least 4 samples, got {}", n));
    check_noise(noise);
    const std::size_t n_outer = n / 2;
    const std::size_t n_inner = n - n_outer;
    std::vector<double> values;
    values.reserve(2 * n);
    std::vector<Label> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n_outer; ++i) {
        const double t = grid(i, n_outer, std::numbers::pi, true);
        values.push_back(std::cos(t));
        values.push_back(std::sin(t));
        labels.push_back(1);
    }
    for (std::size_t i = 0; i < n_inner; ++i) {
        const double t = grid(i, n_inner, std::numbers::pi, true);
        values.push_back(1.0 - std::cos(t));
        values.push_back(1.0 - std::sin(t) - 0.5);
        labels.push_back(2);
    }
    std::mt19937_64 rng(seed);
    add_noise(values, noise, rng);
    return {FeatureMatrix(n, 2, std::move(values)), Configuration(std::move(labels)), "moons"};
}

LabeledDataset make_blobs(const std::vector<std::size_t>& counts, const std::vector<std::vector<double>>& centers,
                          const std::vector<double>& stds, std::uint64_t seed) {
    if (centers.empty()) throw UsageError("blobs need at least one center");
    if (centers.size() != stds.size() || centers.size() != counts.size()) {
        throw UsageError(fmt::format("blobs got {} centers, {} standard deviations and {} counts", centers.size(),
                                     stds.size(), counts.size()));
    }
    const std::size_t d = centers.front().size();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        if (centers[c].size() != d || d == 0) throw UsageError("blob centers must share a non-zero dimension");
        if (!(stds[c] >= 0.0) || !std::isfinite(stds[c])) {
            throw UsageError(fmt::format("blob standard deviation must be finite and non-negative, got {}", stds[c]));
        }
        if (counts[c] == 0) throw UsageError(fmt::format("blob {} has no samples", c + 1));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> values;
    std::vector<Label> labels;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < counts[c]; ++i) {
            for (std::size_t j = 0; j < d; ++j) values.push_back(centers[c][j] + stds[c] * gauss(rng));
            labels.push_back(static_cast<Label>(c + 1));
        }
    }
    const std::size_t n = labels.size();
    return {FeatureMatrix(n, d, std::move(values)), Configuration(std::move(labels)), "blobs"};
}

LabeledDataset make_blobs(std::size_t n, const std::vector<std::vector<double>>& centers,
                          const std::vector<double>& stds, std::uint64_t seed) {
    if (centers.empty()) throw UsageError("blobs need at least one center");
    if (n < centers.size()) {
        throw UsageError(fmt::format("blobs need at least one sample per center ({} < {})", n, centers.size()));
    }
    std::vector<std::size_t> counts(centers.size(), n / centers.size());
    for (std::size_t c = 0; c < n % centers.size(); ++c) ++counts[c];
    return make_blobs(counts, centers, stds, seed);
}

LabeledDataset make_blobs_preset(std::uint64_t seed) {
    LabeledDataset data = make_blobs({60, 10, 14}, {{0.0, 0.0}, {2.2, 0.0}, {5.8, 0.0}}, {0.35, 0.25, 0.5}, seed);
    data.name = "blobs3";
    return data;
}

LabeledDataset make_circles(std::size_t n, double noise, double factor, std::uint64_t seed) {
    if (n < 4) throw UsageError(fmt::format("circles needs at least 4 samples, got {}", n));
    if (!(factor > 0.0 && factor < 1.0)) {
        throw UsageError(fmt::format("circle factor must lie in (0, 1), got {}", factor));
    }
    check_noise(noise);
    const std::size_t n_outer = n / 2;
    const std::size_t n_inner = n - n_outer;
    std::vector<double> values;
    values.reserve(2 * n);
    std::vector<Label> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n_outer; ++i) {
        const double t = grid(i, n_outer, 2.0 * std::numbers::pi, false);
        values.push_back(std::cos(t));
        values.push_back(std::sin(t));
        labels.push_back(1);
    }
    for (std::size_t i = 0; i < n_inner; ++i) {
        const double t = grid(i, n_inner, 2.0 * std::numbers::pi, false);
        values.push_back(factor * std::cos(t));
        values.push_back(factor * std::sin(t));
        labels.push_back(2);
    }
    std::mt19937_64 rng(seed);
    add_noise(values, noise, rng);
    return {FeatureMatrix(n, 2, std::move(values)), Configuration(std::move(labels)), "circles"};
}

LabeledDataset make_density_pair(std::size_t n, std::uint64_t seed) {
    LabeledDataset data = make_blobs(n, {{0.0, 0.0}, {12.0, 0.0}}, {0.25, 2.0}, seed);
    data.name = "density_pair";
    return data;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    if (options.has_header) {
        std::getline(in, line);
        ++line_no;
    }
    std::vector<double> values;
    std::vector<std::int64_t> raw_labels;
    std::size_t width = 0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_cells(line);
        if (rows == 0) {
            width = cells.size();
            if (options.label_column && *options.label_column >= width) {
                throw UsageError(fmt::format("{}: label column {} but rows have {} columns", path.string(),
                                             *options.label_column, width));
            }
        } else if (cells.size() != width) {
            throw FormatError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), line_no, width,
                                          cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string_view cell = trim(cells[c]);
            if (options.label_column && c == *options.label_column) {
                std::int64_t label = 0;
                const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
                if (ec != std::errc{} || end != cell.data() + cell.size() || cell.empty()) {
                    throw FormatError(fmt::format("{}:{}: column {}: label '{}' is not an integer", path.string(),
                                                  line_no, c + 1, cell));
                }
                raw_labels.push_back(label);
                continue;
            }
            double v = 0.0;
            const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || end != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
                throw FormatError(fmt::format("{}:{}: column {}: '{}' is not a finite number", path.string(), line_no,
                                              c + 1, cell));
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw FormatError(path.string() + ": no data rows");
    const std::size_t d = width - (options.label_column ? 1 : 0);
    if (d == 0) throw FormatError(path.string() + ": no feature columns");

    std::optional<Configuration> labels;
    if (options.label_column) labels = relabel_contiguous(std::span<const std::int64_t>(raw_labels));
    return {FeatureMatrix(rows, d, std::move(values)), std::move(labels), path.stem().string()};
}

void save_csv(const LabeledDataset& data, const std::filesystem::path& path, bool header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    const auto& x = data.features;
    if (header) {
        for (std::size_t j = 0; j < x.n_features(); ++j) out << (j ? "," : "") << 'x' << j + 1;
        if (data.labels) out << ",label";
        out << '\n';
    }
    std::string row;
    for (std::size_t i = 0; i < x.n_samples(); ++i) {
        row.clear();
        for (std::size_t j = 0; j < x.n_features(); ++j) {
            if (j) row += ',';
            row += fmt::format("{}", x(i, j));
        }
        if (data.labels) row += fmt::format(",{}", (*data.labels)[i]);
        row += '\n';
        out << row;
    }
}

} // namespace confmix
