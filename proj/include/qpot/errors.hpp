// Exception types shared across the qpot library.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpot {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Expression source could not be parsed. `offset` is the byte offset of the
/// offending token in the input.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t offset_)
      : Error(what + " (byte " + std::to_string(offset_) + ")"), offset(offset_) {}
  std::size_t offset;
};

/// Expression evaluation failed (domain error, division by zero, overflow,
/// unbound symbol). Carries the evaluation point when known.
struct EvalError : Error {
  explicit EvalError(const std::string& what) : Error(what) {}
  EvalError(const std::string& what, double x_, double t_)
      : Error(what + " at (x=" + std::to_string(x_) + ", t=" + std::to_string(t_) + ")"),
        x(x_), t(t_), has_point(true) {}
  double x = 0.0, t = 0.0;
  bool has_point = false;
};

/// Grid construction or use violated an invariant (bad extents, too few
/// nodes/slices for the requested operation, shape mismatch).
struct GridError : Error {
  using Error::Error;
};

/// Problem-spec file failed validation. Message names the offending key.
struct SpecError : Error {
  using Error::Error;
};

/// A slice operator is singular: some eigenvalue of the (shifted) operator
/// sits within tolerance of zero, so the boundary-value problem has no
/// unique solution.
struct SingularSystemError : Error {
  struct SliceFailure {
    int slice;
    double lambda;  // offending eigenvalue of the shifted operator
  };

  SingularSystemError(const std::string& what, double lambda_, int slice_ = -1)
      : Error(what), failures{{slice_, lambda_}} {}
  SingularSystemError(const std::string& what, std::vector<SliceFailure> failures_)
      : Error(what), failures(std::move(failures_)) {}

  std::vector<SliceFailure> failures;
};

/// Internal numerical failure that is not a solvability issue (should not
/// occur for well-posed inputs).
struct SolverError : Error {
  using Error::Error;
};

}  // namespace qpot
