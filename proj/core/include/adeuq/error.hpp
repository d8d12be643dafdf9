#pragma once

#include <stdexcept>
#include <string>

namespace adeuq {

/// Failure classes. The CLI maps each one to a stable exit code.
enum class ErrorKind {
  invalid_argument,  // precondition or config value violation
  config,            // malformed or unknown config entry
  io,
  numerical,         // solver breakdown, NaN loss, exp overflow
  checksum,
  manifest,          // incompatible artifacts
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::invalid_argument, what);
}

}  // namespace adeuq
