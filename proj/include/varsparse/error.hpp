#pragma once

#include <stdexcept>
#include <string>

namespace varsparse {

enum class ErrorCode {
  InvalidArgument,
  Precondition,
  Numerical,
  Io,
  Format,
  Checksum,
  RetryExhausted,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library is an Error carrying a code, so the
// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace varsparse
