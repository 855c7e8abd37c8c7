#include "dapp/log.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>

namespace dapp {

namespace {

std::optional<LogLevel>& current() {
  static std::optional<LogLevel> level;
  return level;
}

LogLevel from_env() {
  const char* v = std::getenv("DAPP_LOG");
  if (!v) return LogLevel::Warn;
  const std::string s(v);
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  if (s == "error") return LogLevel::Error;
  if (s == "off") return LogLevel::Off;
  return LogLevel::Warn;
}

const char* name(LogLevel l) {
  switch (l) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    case LogLevel::Off: break;
  }
  return "off";
}

}  // namespace

LogLevel log_level() {
  if (!current()) current() = from_env();
  return *current();
}

void set_log_level(LogLevel l) { current() = l; }

void log_msg(LogLevel l, const std::string& msg) {
  if (l < log_level()) return;
  std::cerr << "[" << name(l) << "] " << msg << '\n';
}

}  // namespace dapp
