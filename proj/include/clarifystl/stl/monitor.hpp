#pragma once

#include "clarifystl/stl/formula.hpp"
#include "clarifystl/stl/trace.hpp"

namespace clarifystl::stl {

class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A temporal window reached past the trace horizon.
class HorizonExceeded : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

/**
 * Boolean satisfaction (trace, t) |= formula.
 *
 * Quantifiers are decided exactly: a subformula's truth over a step trace
 * can only change at a finite set of instants derived from the trace
 * breakpoints and the interval bounds above it, so checking those instants
 * plus one interior point of every gap between them is exhaustive.
 *
 * Until follows exists t' in [t+lo, t+hi] with rhs at t' and lhs on all of
 * [t, t'].
 *
 * Throws EvaluationError for unknown variables or t outside [0, horizon]
 * and HorizonExceeded when a window extends beyond the horizon.
 */
bool evaluate(const Formula& formula, const Trace& trace, double t);

} // namespace clarifystl::stl
