#pragma once

#include <stdexcept>
#include <string>

namespace nldp {

// Failure categories used across the library. Callers that want to branch on
// the kind (e.g. the sweep harness, which records failures as data) can catch
// nldp::Error and inspect kind().
enum class ErrorKind {
  kInvalidInput,       // bad argument values (empty dataset, n < k, ...)
  kConfig,             // invalid or inconsistent configuration
  kContractViolation,  // an API contract was broken (labels read on unlabeled data)
  kDegenerateVector,   // a vector that must be nonzero had near-zero norm
  kMalformedReport,    // a client report is structurally inconsistent
  kPrecondition,       // an operation precondition was violated
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kContractViolation: return "contract-violation";
    case ErrorKind::kDegenerateVector: return "degenerate-vector";
    case ErrorKind::kMalformedReport: return "malformed-report";
    case ErrorKind::kPrecondition: return "precondition";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace nldp
