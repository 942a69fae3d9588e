#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace photonic_lab {

enum class ErrorCode {
  domain,                 // argument outside the mathematical domain of an operation
  not_found,              // a requested feature (peak, gap, mode) does not exist
  config,                 // simulation or scene configuration is inconsistent
  parse,                  // scenario text could not be parsed
  validation,             // scenario parsed but a parameter is missing or out of range
  instability,            // time stepping produced non-finite fields
  stencil,                // finite-difference stencil left the valid region
  tracking,               // a resonance could not be followed across a sweep
  insufficient_ringdown,  // ring-down window too short for a reliable decay fit
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

// A non-negative quantity that may legitimately be unbounded: the extinction
// ratio of a perfect null, the free spectral range of a balanced interferometer.
struct Extended {
  double value = 0.0;
  bool infinite = false;

  static Extended finite(double v) { return {v, false}; }
  static Extended unbounded() { return {std::numeric_limits<double>::infinity(), true}; }
  bool is_finite() const { return !infinite; }
};

}  // namespace photonic_lab
