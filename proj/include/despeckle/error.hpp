#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace despeckle {

enum class ErrorKind {
  UnsupportedFormat,
  CorruptFile,
  IoError,
  RangeError,
  OutOfBounds,
  InvalidParam,
  DimensionMismatch,
  WindowTooLarge,
  DegenerateRegion,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the toolkit; `kind()` carries the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace despeckle
