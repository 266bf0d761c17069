#include "graphkrig/error.hpp"

namespace graphkrig {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Numeric: return "numeric_error";
    case ErrorCode::Reducible: return "reducible_walk";
    case ErrorCode::Io: return "io_error";
  }
  return "unknown";
}

}  // namespace graphkrig
