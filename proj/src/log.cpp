#include "confmix/log.hpp"

#include <cstdlib>
#include <string>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "confmix/parallel.hpp"

namespace confmix {

namespace {
std::atomic<unsigned> g_max_threads{0};
}

void set_max_threads(unsigned n) noexcept { g_max_threads = n; }

unsigned max_threads() noexcept {
    const unsigned n = g_max_threads;
    if (n != 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void init_logging() {
    auto logger = spdlog::get("confmix");
    if (!logger) logger = spdlog::stderr_color_mt("confmix");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("CONFMIX_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

} // namespace confmix
