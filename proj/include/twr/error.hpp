#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twr {

enum class ErrorCode {
  CycleDetected,
  DisconnectedNode,
  NegativeWeight,
  DuplicateChild,
  InvalidNode,
  InvalidMass,
  NotNormalized,
  DuplicateSupport,
  TreeMismatch,
  SizeMismatch,
  NegativeBeta,
  InvalidAlpha,
  InvalidP,
  InvalidLambda,
  InvalidBandwidth,
  PLessThanTwoForKernel,
  DegenerateDistances,
  InstanceTooLarge,
  InvalidArgument,
  ParseError,
  IoError,
  FingerprintMismatch,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code lets callers (and the CLI
// exit-code mapping) branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twr
