#include "jegauge/error.hpp"

namespace jegauge {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::LengthMismatch: return "length-mismatch error";
    case ErrorKind::UnsupportedDtype: return "unsupported-dtype error";
    case ErrorKind::Unsupported: return "unsupported error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Bounds: return "bounds error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::UndefinedInput: return "undefined-input error";
    case ErrorKind::InvalidInput: return "invalid-input error";
    case ErrorKind::Quota: return "quota error";
    case ErrorKind::Resource: return "resource error";
    case ErrorKind::Incompatible: return "incompatible-reports error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Resource:
      return 3;
    case ErrorKind::Incompatible:
      return 4;
    default:
      return 2;
  }
}

}  // namespace jegauge
