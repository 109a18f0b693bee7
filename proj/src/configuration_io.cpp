#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "confmix/configuration.hpp"
#include "confmix/error.hpp"

namespace confmix {

namespace {

constexpr std::string_view kGammaPrefix = "# gammas:";

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_gamma(std::string_view cell, const std::filesystem::path& path) {
    cell = trim(cell);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw FormatError(fmt::format("{}: bad gamma value '{}'", path.string(), cell));
    }
    return value;
}

} // namespace

void write_label_table(const LabelTable& table, const std::filesystem::path& path) {
    if (table.gammas.size() != table.columns.size()) {
        throw DataError("label table has mismatched gamma and column counts");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");

    out << kGammaPrefix << ' ';
    for (std::size_t c = 0; c < table.gammas.size(); ++c) {
        if (c) out << ',';
        out << fmt::format("{}", table.gammas[c]);
    }
    out << '\n';
    const std::size_t n = table.columns.empty() ? 0 : table.columns.front().size();
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        line.clear();
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) line.push_back(',');
            line += std::to_string(table.columns[c].at(i));
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw DataError("failed writing " + path.string());
}

LabelTable read_label_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
    std::string_view header = trim(line);
    if (!header.starts_with(kGammaPrefix)) {
        throw FormatError(path.string() + ": first line must start with '# gammas:'");
    }
    header.remove_prefix(kGammaPrefix.size());
    header = trim(header);

    LabelTable table;
    if (!header.empty()) {
        for (auto cell : split(header, ',')) table.gammas.push_back(parse_gamma(cell, path));
    }
    table.columns.resize(table.gammas.size());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        const auto cells = split(body, ',');
        if (cells.size() != table.gammas.size()) {
            throw FormatError(fmt::format("{}: row {} has {} labels but the header lists {} gammas",
                                          path.string(), row, cells.size(), table.gammas.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = trim(cells[c]);
            Label value = 0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || value < 1) {
                throw FormatError(fmt::format("{}: row {} column {}: '{}' is not a positive integer label",
                                              path.string(), row, c + 1, cell));
            }
            table.columns[c].push_back(value);
        }
    }
    if (!table.gammas.empty() && table.columns.front().empty()) {
        throw FormatError(path.string() + ": no label rows");
    }
    return table;
}

void save_configuration_set(const ConfigurationSet& set, const std::filesystem::path& path) {
    LabelTable table;
    table.gammas = set.gammas();
    for (const auto& c : set.configurations()) table.columns.push_back(c.labels());
    write_label_table(table, path);
}

ConfigurationSet load_configuration_set(const std::filesystem::path& path) {
    LabelTable table = read_label_table(path);
    std::vector<Configuration> configurations;
    configurations.reserve(table.columns.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        try {
            configurations.emplace_back(std::move(table.columns[c]));
        } catch (const DataError& e) {
            throw FormatError(fmt::format("{}: column {}: {}", path.string(), c + 1, e.what()));
        }
    }
    try {
        return ConfigurationSet(std::move(configurations), std::move(table.gammas));
    } catch (const DataError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace confmix
