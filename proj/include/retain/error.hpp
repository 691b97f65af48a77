#pragma once

#include <stdexcept>
#include <string>

namespace retain {

enum class ErrorKind {
  validation,    // malformed input or violated precondition
  conflict,      // duplicate or contradictory state
  not_found,
  unauthenticated,
  forbidden,
  transport,     // network / remote failure after retries
  parse,         // remote or file schema drift
  insufficient,  // not enough data for an estimator
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::unauthenticated: return "unauthenticated";
    case ErrorKind::forbidden: return "forbidden";
    case ErrorKind::transport: return "transport";
    case ErrorKind::parse: return "parse";
    case ErrorKind::insufficient: return "insufficient";
  }
  return "unknown";
}

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace retain
