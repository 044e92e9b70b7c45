#pragma once

#include <string>

namespace improvkit {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level from IMPROVKIT_LOG (error|info|debug); defaults to error.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace improvkit
