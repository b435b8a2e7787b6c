#pragma once

#include <stdexcept>
#include <string>

namespace nswlab {

enum class ErrorKind {
  invalid_argument,
  domain_mismatch,
  not_found,
  out_of_domain,
  singular_point,
  resolution_error,
  io_error,
  runtime_abort,
};

const char* to_string(ErrorKind kind);

/// Base class for every error raised by the library. The kind is what callers
/// (and the CLI exit-code mapping) dispatch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace nswlab
