#pragma once

#include <stdexcept>
#include <string>

namespace cartan {

enum class ErrorKind {
  invalid_argument,
  precision_exhausted,
  no_sign_change,
  validation_failed,
  checkpoint,
  io,
  interrupted,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Retryable: the caller is expected to double the working precision.
class PrecisionExhausted : public Error {
 public:
  explicit PrecisionExhausted(const std::string& what)
      : Error(ErrorKind::precision_exhausted, what) {}
};

class NoSignChange : public Error {
 public:
  explicit NoSignChange(const std::string& what) : Error(ErrorKind::no_sign_change, what) {}
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cartan
