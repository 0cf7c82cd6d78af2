#pragma once

#include <stdexcept>
#include <string>

namespace tandepth {

enum class Errc {
  UnsupportedLatitude,
  SyncPointNotFound,
  DegenerateTerrain,
  EmptyDensification,
  FormatError,
  EmptyProjection,
  NoGroundAnchors,
  RoughScaleDiverged,
  CfUndefined,
  InvalidCloud,
  CsfFailed,
  DegenerateDisparity,
  InsufficientAnchors,
  DegenerateSystem,
  NonPositiveScale,
  NoOverlap,
  HorizonOnly,
  EmptyEvaluation,
  ConfigError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace tandepth
