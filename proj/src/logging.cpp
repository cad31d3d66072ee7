#include "logging.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace etica {

namespace {

int parse_verbosity() {
    const char* env = std::getenv("ETICA_LOG");
    if (!env) return 0;
    std::string v(env);
    if (v.empty() || v == "0" || v == "quiet") return 0;
    if (v == "1" || v == "info") return 1;
    if (v == "2" || v == "debug") return 2;
    return 1;
}

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

int log_verbosity() {
    static const int level = parse_verbosity();
    return level;
}

void log_info(const std::string& msg) {
    if (log_verbosity() >= 1) {
        std::lock_guard<std::mutex> lock(log_mutex());
        std::cerr << "[etica] " << msg << "\n";
    }
}

void log_debug(const std::string& msg) {
    if (log_verbosity() >= 2) {
        std::lock_guard<std::mutex> lock(log_mutex());
        std::cerr << "[etica] " << msg << "\n";
    }
}

}  // namespace etica
