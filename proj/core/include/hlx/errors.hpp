#pragma once

#include <stdexcept>
#include <string>

namespace hlx {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (negative slope, t <= 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The truncated box cannot host the requested computation: a kernel reaches
/// past half the box, or the trusted region became empty during an iteration.
class DomainTooSmall : public Error {
 public:
  explicit DomainTooSmall(const std::string& what, int step = -1)
      : Error(what), step_(step) {}

  /// 1-based step index at which the trusted region vanished, or -1.
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// The grid cannot resolve the inverse modulus of continuity for this eps.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class EnumerationBudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace hlx
