#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace litelong {

enum class ErrorKind {
  parse,        // malformed input file or model output
  validation,   // input violates a documented invariant
  not_found,
  backend,      // transport failure talking to a model backend
  consistency,  // internal bookkeeping does not add up (e.g. missing verdict)
  io,
  aborted,      // pipeline stopped by a failure threshold
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::backend: return "backend";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::io: return "io";
    case ErrorKind::aborted: return "aborted";
  }
  return "unknown";
}

/// Base for every error raised by the library. The kind is what the CLI
/// reports in its machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error(ErrorKind::parse, message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::validation, message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message)
      : Error(ErrorKind::not_found, message) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& message) : Error(ErrorKind::backend, message) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& message)
      : Error(ErrorKind::consistency, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

class AbortedError : public Error {
 public:
  explicit AbortedError(const std::string& message) : Error(ErrorKind::aborted, message) {}
};

}  // namespace litelong
