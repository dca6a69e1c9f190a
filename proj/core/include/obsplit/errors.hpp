#pragma once

#include <stdexcept>
#include <string>

namespace obsplit {

enum class ErrorKind {
  InvalidInput,
  Domain,
  SingularProjector,
  NotInGroup,
  OutOfChart,
  DegenerateMetric,
  EmptySolution,
  StepUnderflow,
  NotInExpDomain,
  UnreachableDirection,
  Superluminal,
  IllPosedForce,
  CriticalPoint,
  NonInvertible,
  Signature,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace obsplit
