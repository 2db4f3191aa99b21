#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mast {

enum class ErrorKind {
  InvalidInput,
  DegenerateInput,
  DegenerateLogits,
  FormatError,
  InfeasibleMasks,
  SingularFit,
  EmptyBand,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind tags so
/// that callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a query cannot receive a non-negative content mass.
class InfeasibleMasksError : public Error {
 public:
  InfeasibleMasksError(std::size_t token, double allocation, const std::string& what)
      : Error(ErrorKind::InfeasibleMasks, what), token_(token), allocation_(allocation) {}

  std::size_t worst_token() const noexcept { return token_; }
  double worst_allocation() const noexcept { return allocation_; }

 private:
  std::size_t token_;
  double allocation_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) fail(kind, what);
}

}  // namespace mast
