#pragma once

#include <stdexcept>
#include <string>

namespace hfin {

/// Bad input: malformed config, out-of-range index, shape mismatch.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An invariant the code asserts on its own output failed.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

inline void require(bool ok, const std::string& invariant, const std::string& detail = "") {
  if (!ok) throw InvariantViolation(invariant, detail);
}

}  // namespace hfin
