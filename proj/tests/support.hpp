#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "confmix/configuration.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("confmix_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline confmix::Configuration config(const std::vector<int>& labels) {
    return confmix::Configuration(std::vector<confmix::Label>(labels.begin(), labels.end()));
}

inline std::vector<int> ints(const confmix::Configuration& c) {
    return std::vector<int>(c.labels().begin(), c.labels().end());
}

/// Applies a random bijection to the labels, keeping them contiguous.
inline confmix::Configuration permute_labels(const confmix::Configuration& c, std::mt19937_64& rng) {
    std::vector<confmix::Label> perm(static_cast<std::size_t>(c.n_clusters()));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<confmix::Label>(i + 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<confmix::Label> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = perm[static_cast<std::size_t>(c[i] - 1)];
    return confmix::Configuration(std::move(out));
}

} // namespace testing
