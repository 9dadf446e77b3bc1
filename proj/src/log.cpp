#include "qshadow/log.hpp"

#include <cstdio>
#include <cstdlib>

#include "qshadow/types.hpp"

namespace qshadow::util {

namespace {

LogLevel parse_level() {
  const char* env = std::getenv("QSHADOW_LOG");
  if (env == nullptr) return LogLevel::Warn;
  const std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  if (v == "warn" || v == "warning") return LogLevel::Warn;
  if (v == "error") return LogLevel::Error;
  if (v == "off" || v == "none") return LogLevel::Off;
  return LogLevel::Warn;
}

const char* tag(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    default: return "?";
  }
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) < static_cast<int>(log_level())) return;
  std::fprintf(stderr, "qshadow [%s] %s\n", tag(level), message.c_str());
}

}  // namespace qshadow::util

namespace qshadow {

const char* to_string(MapRole role) {
  switch (role) {
    case MapRole::Intensity: return "intensity";
    case MapRole::Variance: return "variance";
    case MapRole::Transmission: return "transmission";
    case MapRole::Decibels: return "dB";
  }
  return "?";
}

MapRole map_role_from_string(const std::string& s) {
  if (s == "intensity") return MapRole::Intensity;
  if (s == "variance") return MapRole::Variance;
  if (s == "transmission") return MapRole::Transmission;
  if (s == "dB") return MapRole::Decibels;
  throw ParameterError("unknown map role: " + s);
}

double ScalarMap::valid_mean() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (valid[i] != 0) {
      sum += values[i];
      ++n;
    }
  }
  if (n == 0) throw ParameterError("valid_mean: map has no valid pixels");
  return sum / static_cast<double>(n);
}

}  // namespace qshadow
