#include "msi/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace msi {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::Info)};
std::mutex g_mutex;

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::Error: return "error";
        case LogLevel::Warn: return "warn";
        case LogLevel::Info: return "info";
        case LogLevel::Debug: return "debug";
    }
    return "info";
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_event(LogLevel level, const std::string& event, const Json& fields) {
    if (static_cast<int>(level) > g_level.load()) return;
    Json line = Json::object();
    line["level"] = level_name(level);
    line["event"] = event;
    for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << line.dump() << '\n';
}

}  // namespace msi
