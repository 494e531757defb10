#pragma once

#include <stdexcept>
#include <string>

namespace hotspots {

/// Failure categories surfaced by the library. The CLI maps them to exit
/// codes and a machine-readable error record.
enum class ErrorCode {
  invalid_input,
  degenerate_geometry,
  precondition,
  meshing,
  solver,
  outside_domain,
  ill_conditioned,
  io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::degenerate_geometry: return "degenerate_geometry";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::meshing: return "meshing";
    case ErrorCode::solver: return "solver";
    case ErrorCode::outside_domain: return "outside_domain";
    case ErrorCode::ill_conditioned: return "ill_conditioned";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hotspots
