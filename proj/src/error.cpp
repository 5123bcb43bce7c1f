#include "varsparse/error.hpp"

namespace varsparse {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Precondition: return "precondition violated";
    case ErrorCode::Numerical: return "numerical error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Format: return "format error";
    case ErrorCode::Checksum: return "checksum mismatch";
    case ErrorCode::RetryExhausted: return "retry budget exhausted";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace varsparse
