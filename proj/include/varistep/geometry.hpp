#pragma once

// Finite-difference checks of symplecticity. Phase vectors are (p, q) and
// the symplectic matrix is Omega = [[0, I], [-I, 0]], so that
// omega(U, V) = U^T Omega V = sum_i (dp_i(U) dq_i(V) - dq_i(U) dp_i(V)).

#include <functional>
#include <vector>

#include "varistep/model.hpp"
#include "varistep/scheme_family.hpp"
#include "varistep/stepper.hpp"

namespace varistep {

/// Map on packed (p, q) vectors.
using PhaseMap = std::function<Vector(const Vector&)>;

Matrix symplectic_matrix(int dimension);

/// Central-difference Jacobian. A nonpositive h selects 1e-6 * (1 + |x|).
Matrix step_jacobian(const PhaseMap& map, const Vector& x, double h = 0.0);

/// ||J^T Omega J - Omega||_inf (maximum absolute row sum). Throws
/// InvalidInput for a non-square or odd-sized matrix.
double symplecticity_residual(const Matrix& jacobian);

/// One implicit midpoint step of length tau starting at time t.
PhaseMap fixed_midpoint_map(ModelPtr model, double t, double tau, const SolveSettings& settings);

/// One step of the alpha/beta (p, q) map.
PhaseMap alpha_beta_map(ModelPtr model, const SchemeParams& s, double t, double tau,
                        const SolveSettings& settings);

/// `steps` intervals of the variable-step scheme, starting with tau1. The
/// later step lengths are re-solved for every input, so they are part of the
/// map.
PhaseMap variable_step_map(ModelPtr model, double t, double tau1, std::size_t steps,
                           const StepperSettings& settings);

enum class SchemeKind { VariableStepMidpoint, FixedStepMidpoint, AlphaBeta };

struct SchemeChoice {
  SchemeKind kind = SchemeKind::VariableStepMidpoint;
  double alpha = 0.5;
  double beta = 0.5;
};

/// Integrates with the chosen scheme. `tau` is tau1 for the variable-step
/// scheme and the fixed step otherwise.
IntegrationResult integrate_scheme(ModelPtr model, const SchemeChoice& scheme, const PhasePoint& x0,
                                   double tau, const StopRule& stop,
                                   const StepperSettings& settings);

struct SymplecticReport {
  /// omega_D^(k)(U_k, V_k) for k = 0..steps, where U_k and V_k push the
  /// initial variations u, v forward to node k.
  std::vector<double> omega;
  /// max_k |omega^(k) - omega^(0)|
  double max_deviation = 0.0;
  /// max_deviation / |omega^(0)|
  double relative_deviation = 0.0;
  double epsilon = 0.0;
};

/// Sensitivities come from central differences over four re-integrated
/// trajectories started at x0 +- eps u and x0 +- eps v with
/// eps = 1e-6 * (1 + ||x0||); nodes are matched by index. Throws
/// InvalidInput when u and v are parallel, and the integration error when a
/// perturbed run fails before `steps` intervals.
SymplecticReport omega_sequence(ModelPtr model, const PhasePoint& x0, double tau,
                                std::size_t steps, const Vector& u, const Vector& v,
                                const SchemeChoice& scheme, const StepperSettings& settings);

}  // namespace varistep
