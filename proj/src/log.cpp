#include "tandepth/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "tandepth/error.hpp"

namespace tandepth {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UnsupportedLatitude: return "UnsupportedLatitude";
    case Errc::SyncPointNotFound: return "SyncPointNotFound";
    case Errc::DegenerateTerrain: return "DegenerateTerrain";
    case Errc::EmptyDensification: return "EmptyDensification";
    case Errc::FormatError: return "FormatError";
    case Errc::EmptyProjection: return "EmptyProjection";
    case Errc::NoGroundAnchors: return "NoGroundAnchors";
    case Errc::RoughScaleDiverged: return "RoughScaleDiverged";
    case Errc::CfUndefined: return "CfUndefined";
    case Errc::InvalidCloud: return "InvalidCloud";
    case Errc::CsfFailed: return "CsfFailed";
    case Errc::DegenerateDisparity: return "DegenerateDisparity";
    case Errc::InsufficientAnchors: return "InsufficientAnchors";
    case Errc::DegenerateSystem: return "DegenerateSystem";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::HorizonOnly: return "HorizonOnly";
    case Errc::EmptyEvaluation: return "EmptyEvaluation";
    case Errc::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

namespace {

LogLevel parse_threshold() {
  const char* env = std::getenv("TANDEPTH_LOG");
  if (!env) return LogLevel::Info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  if (std::strcmp(env, "info") == 0) return LogLevel::Info;
  if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(env, "error") == 0) return LogLevel::Error;
  return LogLevel::Info;
}

std::mutex g_mutex;

}  // namespace

LogLevel log_threshold() {
  static LogLevel level = parse_threshold();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  if (level < log_threshold()) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace tandepth
