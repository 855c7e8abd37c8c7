#pragma once

#include <string>

namespace dapp {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Level taken from the DAPP_LOG environment variable on first use
/// (debug|info|warn|error|off, default warn).
LogLevel log_level();
void set_log_level(LogLevel l);
void log_msg(LogLevel l, const std::string& msg);

}  // namespace dapp
