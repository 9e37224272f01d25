#pragma once

// The alpha/beta family of first-order discrete Lagrangians
//
//   L^(k) = L(x_k, v_k; t_k),  x_k = alpha q_k + beta q_{k+1},  v_k = (q_{k+1} - q_k)/tau_k,
//
// at caller-supplied step lengths. Writing L_x and L_v for the partials in
// the two slots, the three-point Euler-Lagrange equation is
//
//   alpha L_x^(k) + (tau_{k-1}/tau_k) beta L_x^(k-1) - (L_v^(k) - L_v^(k-1))/tau_k = 0,
//
// the discrete momentum is p_k = L_v^(k-1) + tau_{k-1} beta L_x^(k-1), and
// on solutions
//
//   (p_{k+1} - p_k)/tau_k = L_x^(k),   alpha p_{k+1} + beta p_k = L_v^(k).
//
// alpha = 1 and alpha = 0 give the two symplectic Euler methods, alpha = 1/2
// the implicit midpoint rule.

#include <optional>
#include <utility>

#include "varistep/model.hpp"
#include "varistep/newton.hpp"
#include "varistep/stepper.hpp"

namespace varistep {

class SchemeParams {
 public:
  /// Throws InvalidInput unless |alpha + beta - 1| <= 1e-14.
  SchemeParams(double alpha, double beta);
  static SchemeParams from_alpha(double alpha) { return SchemeParams(alpha, 1.0 - alpha); }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

 private:
  double alpha_;
  double beta_;
};

/// Three consecutive nodes k-1, k, k+1. q_next may be empty when it is the
/// unknown.
struct SchemeWindow {
  Vector q_prev;
  Vector q;
  Vector q_next;
  double t_prev = 0.0;
  double t = 0.0;
  double tau_prev = 0.0;
  double tau = 0.0;
};

/// L = |v|^2/(2c) - V(x, t_k) for a separable Hamiltonian.
std::shared_ptr<const LagrangianModel> scheme_lagrangian(ModelPtr model);

/// Left-hand side of the three-point Euler-Lagrange equation at node k.
Vector alpha_beta_el_residual(const LagrangianModel& lagrangian, const SchemeParams& s,
                              const SchemeWindow& w);

/// Solves the three-point equation for q_{k+1}, starting from linear
/// extrapolation. Throws NoConvergence.
Vector alpha_beta_el_step(const LagrangianModel& lagrangian, const SchemeParams& s,
                          const SchemeWindow& w, const SolveSettings& settings = {});

/// (p_k, p_{k+1}) from the momentum definition. Requires q_next.
std::pair<Vector, Vector> discrete_legendre(const LagrangianModel& lagrangian,
                                            const SchemeParams& s, const SchemeWindow& w);

/// (alpha p_{k+1} + beta p_k) . v_k - L^(k) on the interval [t_k, t_{k+1}].
double discrete_hamiltonian(const LagrangianModel& lagrangian, const SchemeParams& s,
                            const SchemeWindow& w, const std::pair<Vector, Vector>& momenta);

/// One step of the (p, q) map: solves p_k + alpha tau L_x^(k) - L_v^(k) = 0
/// for q_{k+1}, then p_{k+1} = p_k + tau L_x^(k). This is also the inverse
/// discrete Legendre transform.
PhasePoint alpha_beta_map_step(const LagrangianModel& lagrangian, const SchemeParams& s,
                               const PhasePoint& x, double tau,
                               const SolveSettings& settings = {}, int* iterations = nullptr);

/// Residuals of the two canonical equations on one interval, stacked as
/// [(p_{k+1} - p_k)/tau - L_x ; alpha p_{k+1} + beta p_k - L_v].
Vector canonical_residual(const LagrangianModel& lagrangian, const SchemeParams& s,
                          const PhasePoint& a, const PhasePoint& b);

/// Euler-Lagrange residual at every interior node of a trajectory, window
/// [1, N-1).
GridFunction alpha_beta_el_residual(const LagrangianModel& lagrangian, const SchemeParams& s,
                                    const GridFunction& q);

/// Fixed-step integration with the (p, q) map. Energies in the records are
/// midpoint energies of the Hamiltonian, as for the stepper.
IntegrationResult integrate_alpha_beta(ModelPtr model, const SchemeParams& s, const PhasePoint& x0,
                                       double tau, const StopRule& stop,
                                       const SolveSettings& settings = {});

}  // namespace varistep
