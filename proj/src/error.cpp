#include "statefulrec/error.hpp"

namespace statefulrec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kInvalidConfiguration: return "invalid-configuration";
    case ErrorKind::kContractViolation: return "contract-violation";
    case ErrorKind::kInsufficientHistory: return "insufficient-history";
    case ErrorKind::kStaleEvent: return "stale-event";
    case ErrorKind::kMissingState: return "missing-state";
    case ErrorKind::kCorruptStore: return "corrupt-store";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBackend: return "backend";
    case ErrorKind::kDegenerateSample: return "degenerate-sample";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

BackendError::BackendError(int status, const std::string& message)
    : Error(ErrorKind::kBackend, message), status_(status) {}

Error annotate(const Error& error, std::string_view context) {
  return Error(error.kind(), std::string(context) + ": " + error.what());
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace statefulrec
