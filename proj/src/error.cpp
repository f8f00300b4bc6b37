#include "ipid/error.hpp"

namespace ipid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::unsupported_pair: return "unsupported_pair";
    case ErrorCode::unknown_candidate: return "unknown_candidate";
    case ErrorCode::period_mismatch: return "period_mismatch";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::no_lfl: return "no_lfl";
    case ErrorCode::membership: return "membership";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace ipid
