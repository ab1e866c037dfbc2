#pragma once

#include <stdexcept>
#include <string>

namespace jegauge {

enum class ErrorKind {
  Io,
  Format,
  LengthMismatch,
  UnsupportedDtype,
  Unsupported,
  Validation,
  Bounds,
  Dimension,
  Numeric,
  Range,
  UndefinedInput,
  InvalidInput,
  Quota,
  Resource,
  Incompatible,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can map it
/// onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// 0 success, 2 validation, 3 I/O, 4 incompatible inputs.
int exit_code_for(ErrorKind kind);

}  // namespace jegauge
