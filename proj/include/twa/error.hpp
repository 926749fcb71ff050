#pragma once

#include <stdexcept>
#include <string>

namespace twa {

enum class ErrorCode {
  SchemaError,
  DuplicateDriver,
  UndrivenNet,
  CombinationalLoop,
  UnknownNet,
  MissingDelay,
  NoMatchingPath,
  WidthMismatch,
  InvalidFraction,
  TraceTooShort,
  MissingBeta,
  ZeroStress,
  DomainError,
  LengthMismatch,
  FieldMapMismatch,
  Unreachable,
  Timeout,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twa
