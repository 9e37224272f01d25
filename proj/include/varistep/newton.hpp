#pragma once

#include <functional>

#include "varistep/grid.hpp"

namespace varistep {

struct SolveSettings {
  double tolerance = 1e-12;   // on the infinity norm of F
  int max_iterations = 50;
  double backtrack = 0.5;     // step shrink factor
  int max_halvings = 20;
  double fd_step = 1e-7;      // central-difference step is fd_step * (1 + |x_j|)
  double min_rcond = 1e-12;   // reciprocal condition below which J is singular

  /// Throws InvalidInput for a nonpositive tolerance or iteration budget.
  void validate() const;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

struct SolveResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;  // infinity norm of F(x)
};

/// Damped Newton iteration. Each step is halved until the Euclidean residual
/// norm decreases. Without an analytic Jacobian one is built by central
/// differences.
///
/// Throws NoConvergence (with the best iterate) when the budget runs out or
/// the line search stalls, and SingularSystem when the Jacobian's reciprocal
/// condition estimate drops below min_rcond. EvalError raised by F at the
/// starting point propagates; at trial points it counts as a rejected step.
SolveResult solve_newton(const ResidualFn& f, const Vector& x0, const SolveSettings& settings = {},
                         const JacobianFn& jacobian = {});

/// Central-difference Jacobian of f at x with step h_j = rel_step * (1 + |x_j|).
Matrix fd_jacobian(const ResidualFn& f, const Vector& x, double rel_step);

}  // namespace varistep
