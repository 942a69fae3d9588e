#include "photonic_lab/error.hpp"

namespace photonic_lab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::config: return "config";
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::instability: return "instability";
    case ErrorCode::stencil: return "stencil";
    case ErrorCode::tracking: return "tracking";
    case ErrorCode::insufficient_ringdown: return "insufficient_ringdown";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace photonic_lab
