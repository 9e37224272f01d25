#include "varistep/newton.hpp"

#include <cmath>

#include <Eigen/LU>

#include "varistep/error.hpp"

namespace varistep {

void SolveSettings::validate() const {
  if (!(tolerance > 0.0)) throw InvalidInput("solver tolerance must be positive");
  if (max_iterations < 1) throw InvalidInput("solver needs at least one iteration");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidInput("backtrack factor must be in (0,1)");
  if (max_halvings < 0) throw InvalidInput("max_halvings must be nonnegative");
  if (!(fd_step > 0.0)) throw InvalidInput("finite-difference step must be positive");
}

Matrix fd_jacobian(const ResidualFn& f, const Vector& x, double rel_step) {
  Matrix jac;
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    // Divide by the representable step so linear maps are differentiated exactly.
    const double width = (xp[j] - x[j]) + (x[j] - xm[j]);
    const Vector col = (f(xp) - f(xm)) / width;
    if (j == 0) jac.resize(col.size(), x.size());
    jac.col(j) = col;
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

SolveResult solve_newton(const ResidualFn& f, const Vector& x0, const SolveSettings& settings,
                         const JacobianFn& jacobian) {
  settings.validate();
  Vector x = x0;
  Vector fx = f(x);
  if (fx.size() != x.size()) throw InvalidInput("residual and unknown sizes differ");
  double norm2 = fx.norm();
  double norm_inf = fx.size() ? fx.cwiseAbs().maxCoeff() : 0.0;
  Vector best = x;
  double best_inf = norm_inf;

  for (int it = 0; it < settings.max_iterations; ++it) {
    if (norm_inf <= settings.tolerance) return {x, it, norm_inf};
    if (!std::isfinite(norm2)) break;

    const Matrix jac = jacobian ? jacobian(x) : fd_jacobian(f, x, settings.fd_step);
    const Eigen::PartialPivLU<Matrix> lu(jac);
    const double rcond = lu.rcond();
    if (!(rcond >= settings.min_rcond)) {
      throw SingularSystem("Jacobian is singular (reciprocal condition " + std::to_string(rcond) +
                           ")");
    }
    const Vector dx = lu.solve(-fx);

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= settings.max_halvings; ++h, lambda *= settings.backtrack) {
      const Vector trial = x + lambda * dx;
      Vector ft;
      try {
        ft = f(trial);
      } catch (const EvalError&) {
        continue;
      }
      const double n2 = ft.norm();
      if (std::isfinite(n2) && n2 < norm2) {
        x = trial;
        fx = std::move(ft);
        norm2 = n2;
        norm_inf = fx.cwiseAbs().maxCoeff();
        accepted = true;
        break;
      }
    }
    if (norm_inf < best_inf) {
      best = x;
      best_inf = norm_inf;
    }
    if (!accepted) {
      if (norm_inf <= settings.tolerance) return {x, it, norm_inf};
      throw NoConvergence("line search stalled at residual " + std::to_string(norm_inf), best,
                          best_inf, it + 1);
    }
  }
  if (norm_inf <= settings.tolerance) return {x, settings.max_iterations, norm_inf};
  throw NoConvergence("no convergence after " + std::to_string(settings.max_iterations) +
                          " iterations (residual " + std::to_string(best_inf) + ")",
                      best, best_inf, settings.max_iterations);
}

}  // namespace varistep
