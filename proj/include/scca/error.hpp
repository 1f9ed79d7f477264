#ifndef SCCA_ERROR_HPP
#define SCCA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace scca {

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kValidation,  // bad arguments or malformed input data
  kNumerical,   // singular / ill-conditioned matrices, all-degenerate streams
  kIo,          // unreadable or unwritable files
  kInternal,    // broken internal invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace scca

#endif  // SCCA_ERROR_HPP
