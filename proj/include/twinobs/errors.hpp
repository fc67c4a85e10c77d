#pragma once

#include <stdexcept>
#include <string>

namespace twinobs {

/// Operand shapes are incompatible (non-square, mismatched dimensions).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Required metadata is missing, e.g. a partial trace on a state without
/// bipartite dimensions.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed caller input: overlapping projectors, non-unit vectors,
/// zero Schmidt weights and the like.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value outside the mathematical domain of the operation
/// (negative probability weights).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A precondition that depends on the state failed. `deficit` carries the
/// magnitude of the violation (missing probability, worst residual).
class PreconditionError : public std::logic_error {
 public:
  PreconditionError(const std::string& what, double deficit)
      : std::logic_error(what), deficit_(deficit) {}

  double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

/// The eigensolver or SVD did not converge, or its output failed the
/// reconstruction check.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace twinobs
