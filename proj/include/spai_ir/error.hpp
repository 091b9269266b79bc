#pragma once

#include <stdexcept>
#include <string>

namespace spai_ir {

enum class ErrorKind {
  Parse,
  Io,
  Domain,
  Dimension,
  Singular,
  ZeroColumn,
  ZeroDiagonal,
  Overflow,
  InvalidArgument,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::ZeroColumn: return "zero column";
    case ErrorKind::ZeroDiagonal: return "zero diagonal";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::InvalidArgument: return "invalid argument";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code logic) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace spai_ir
