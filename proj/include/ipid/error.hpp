#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipid {

enum class ErrorCode {
  invalid_argument,
  domain,
  unsupported_pair,
  unknown_candidate,
  period_mismatch,
  insufficient_data,
  no_lfl,
  membership,
  degenerate,
  unsupported,
  parse,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library exception. Every failure raised by ipid carries a stable code so the
/// CLI can emit a machine-readable error object.
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

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace ipid
