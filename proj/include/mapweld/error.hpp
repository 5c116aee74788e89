#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mapweld {

enum class ErrorCode {
  kInvalidGeometry,
  kParseError,
  kVersionError,
  kIoError,
  kEmptySet,
  kClassMismatch,
  kFrameMismatch,
  kUnknownCell,
  kUndecidedCell,
  kStaleProposal,
  kDegenerateTrace,
  kNoGroundFound,
  kInvalidScenario,
  kUnknownElement,
};

std::string_view to_string(ErrorCode code);

// All domain failures surface as this exception; the code identifies the
// contract that was violated.
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

}  // namespace mapweld
