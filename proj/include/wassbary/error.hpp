#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wassbary {

enum class ErrorKind {
  Domain,          // argument outside the operation's domain
  Shape,           // dimension mismatch
  Representation,  // unsupported pairing of measure or map families
  Conditioning,    // singular or indefinite matrix
  Capacity,        // problem exceeds a configured size cap
  Parse,           // malformed input file
  Io,              // filesystem failure
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when a matrix expected to be positive-definite is not.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double smallest_eigenvalue);
  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace wassbary
