#pragma once

#include <stdexcept>
#include <string>

namespace mra {

enum class ErrorKind {
  InvalidArgument,     // malformed input or violated precondition
  DegenerateDraw,      // random construction could not satisfy its constraints
  NotSampleable,       // density is negative somewhere on the evaluation grid
  VanishingMoment,     // |M1[k]| at or below the inversion guard
  InconsistentMoments, // a quantity that must be real positive is not
  UndefinedPhase,      // phase anchor has (near) zero modulus
  NonUniformRadial,    // operation requires Q_k = Q for all k
  RankDeficient,       // no eigenvalue above the rank threshold
  AlreadyDebiased,
  EmptyInput,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

class MraError : public std::runtime_error {
 public:
  MraError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mra
