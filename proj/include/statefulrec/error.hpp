#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace statefulrec {

enum class ErrorKind {
  kInvalidInput,
  kInvalidParameter,
  kInvalidConfiguration,
  kContractViolation,
  kInsufficientHistory,
  kStaleEvent,
  kMissingState,
  kCorruptStore,
  kIo,
  kBackend,
  kDegenerateSample,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Backend failures keep the HTTP status (0 when the request never completed).
class BackendError : public Error {
 public:
  BackendError(int status, const std::string& message);

  int status() const noexcept { return status_; }

 private:
  int status_;
};

// Returns a copy of `error` whose message is prefixed by `context`.
Error annotate(const Error& error, std::string_view context);

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace statefulrec
