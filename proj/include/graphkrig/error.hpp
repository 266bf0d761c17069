#pragma once

#include <stdexcept>
#include <string>

namespace graphkrig {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse,
  NotFound,
  Numeric,
  Reducible,
  Io,
};

/// Stable lower-case name used in diagnostics and by the C API.
const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace graphkrig
