#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robust_treat {

enum class ErrorKind {
  Domain,           // argument outside an operation's domain
  DegenerateSpec,   // mu_bar = 0, empty site list, ...
  InfeasibleSpec,   // identified set empty (lower > upper)
  KnifeEdge,        // upper + lower = 0 at mu_bar, normalization unavailable
  LinearAlgebra,    // covariance not SPD, singular solve
  DegenerateIndex,  // w' Sigma w = 0
  Regime,           // constant requested in the wrong regime
  Dimension,        // vector sizes disagree
  Precondition,     // other caller contract violations
  Numeric,          // root finding / convergence failure
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robust_treat
