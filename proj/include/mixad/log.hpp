#pragma once

#include <string>

namespace mixad {

enum class LogLevel { error = 0, info = 1, debug = 2 };

// Level comes from MIXAD_LOG={error|info|debug}; default is info.
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace mixad
