#pragma once

#include <stdexcept>
#include <string>

namespace terrasemi {

/// Category of a toolkit failure. The CLI maps these onto structured error
/// records; library callers usually only need `what()`.
enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kFormat,
  kIo,
  kInfeasible,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kInfeasible: return "infeasible";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace terrasemi
