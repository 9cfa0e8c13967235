#pragma once

#include <stdexcept>
#include <string>

namespace abd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or otherwise unusable geometry (zero-area triangle, zero-length edge, open mesh).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (e.g. a CCD query that starts in contact).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Two primitives reached zero distance; the barrier is undefined there.
class IntersectionError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Cholesky breakdown. `block` is the index of the pivot block (in the caller's block numbering).
class FactorizationError : public SolverError {
 public:
  FactorizationError(const std::string& what, int block) : SolverError(what), block_(block) {}
  int block() const { return block_; }

 private:
  int block_;
};

class SceneError : public Error {
 public:
  using Error::Error;
};

}  // namespace abd
