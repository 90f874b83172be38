#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swb {

enum class ErrorKind {
  kUnknownId,
  kRange,
  kSyntax,
  kDuplicate,
  kValidation,
  kVersion,
  kIntegrity,
  kConflict,
  kIllegalTransition,
  kUnknownPair,
  kUnknownVoter,
  kResource,
  kMissingPair,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

// All user-facing failures raised by the library. Anything else escaping
// the library is an internal fault.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Syntax errors carry a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message)
      : Error(ErrorKind::kSyntax, std::to_string(line) + ":" +
                                      std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace swb
