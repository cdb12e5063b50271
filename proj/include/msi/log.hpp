#pragma once

#include <string>

#include "msi/io.hpp"

namespace msi {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// JSON-lines event logger writing to stderr. Thread safe.
void set_log_level(LogLevel level);
LogLevel log_level();

// Emits {"level":..,"event":..,...fields} as one line when level is enabled.
void log_event(LogLevel level, const std::string& event, const Json& fields = Json::object());

}  // namespace msi
