#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "confmix/datasets.hpp"
#include "confmix/error.hpp"

namespace confmix {

namespace {

int base_code(char c) {
    switch (c) {
    case 'A': case 'a': return 0;
    case 'C': case 'c': return 1;
    case 'G': case 'g': return 2;
    case 'T': case 't': return 3;
    default: return -1;
    }
}

} // namespace

std::vector<std::uint32_t> kmer_counts(std::string_view sequence, std::size_t k) {
    if (k < 1) throw UsageError("k-mer length must be at least 1");
    if (k > 15) throw UsageError(fmt::format("k-mer length {} would need 4^{} counters", k, k));
    if (sequence.size() < k) {
        throw DataError(fmt::format("sequence of length {} is shorter than k = {}", sequence.size(), k));
    }
    const std::size_t size = std::size_t{1} << (2 * k);
    const std::size_t mask = size - 1;
    std::vector<std::uint32_t> counts(size, 0);

    std::size_t code = 0;
    std::size_t run = 0; // valid characters ending at the current position
    std::size_t skipped = 0;
    for (char c : sequence) {
        const int b = base_code(c);
        if (b < 0) {
            run = 0;
            ++skipped;
            continue;
        }
        code = ((code << 2) | static_cast<std::size_t>(b)) & mask;
        if (++run >= k) ++counts[code];
    }
    if (skipped > 0) spdlog::warn("kmer: skipped {} non-ACGT characters", skipped);
    return counts;
}

std::vector<FastaRecord> read_fasta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<FastaRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '>') {
            records.push_back({line.substr(1), {}});
        } else if (records.empty()) {
            throw FormatError(fmt::format("{}:{}: sequence data before the first '>' header", path.string(), line_no));
        } else {
            records.back().sequence += line;
        }
    }
    if (records.empty()) throw FormatError(path.string() + ": no FASTA records");
    return records;
}

FeatureMatrix kmer_matrix(const std::vector<FastaRecord>& records, std::size_t k) {
    if (records.empty()) throw DataError("no sequences to vectorize");
    std::vector<double> values;
    std::size_t width = 0;
    for (const auto& r : records) {
        const auto counts = kmer_counts(r.sequence, k);
        width = counts.size();
        values.insert(values.end(), counts.begin(), counts.end());
    }
    return FeatureMatrix(records.size(), width, std::move(values));
}

} // namespace confmix
