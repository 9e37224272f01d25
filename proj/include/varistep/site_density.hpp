#pragma once

// Step-length asymptotics of the variable-step midpoint scheme for one
// degree of freedom, H = c p^2/2 + V(q, t).
//
// Expanding the energy equation to second order gives, with V' = dV/dq,
// V'_t = d2V/dq dt and so on,
//
//   V'_t p tau + (V''p^2 + 3V'_t p + V'^2) dtau/2 + (V''_t p^2 + V'''p^3/3) tau^2/2 = 0.
//
// For c != 1 the formulas are applied to (c p, c V), which leaves the scheme
// and its energy equation unchanged. For autonomous V the site density
// rho = 1/tau obeys ln(rho_A/rho_B) = (1/3) [ln(V''p^2 + V'^2)]_B^A.

#include <span>
#include <string>
#include <vector>

#include "varistep/model.hpp"
#include "varistep/stepper.hpp"

namespace varistep {

/// Predicted tau_{k+1} - tau_k at state x with step tau. Throws
/// CapabilityError without a potential bundle (including n > 1) and
/// SingularDomain when |V''p^2 + 3V'_t p + V'^2| < 1e-12 times the sum of
/// the absolute values of its terms.
double predicted_delta_tau(const HamiltonianModel& model, const PhasePoint& x, double tau);

/// ln(rho(t_A)/rho(t_B)) predicted from the states at t_A and t_B. Throws
/// CapabilityError for non-autonomous models and SingularDomain when
/// V''p^2 + V'^2 <= 0 at either state.
double density_ratio(const HamiltonianModel& model, const PhasePoint& a, const PhasePoint& b);

struct DensityRow {
  std::size_t k = 0;
  double tau = 0.0;
  double dtau_obs = 0.0;
  double dtau_pred = 0.0;  // NaN when singular
  std::string flag;        // "", "singular" or "degenerate"
};

struct DensityReport {
  std::vector<DensityRow> rows;
  double max_abs_discrepancy = 0.0;
  double max_rel_discrepancy = 0.0;  // |obs - pred| / |pred| over rows with pred != 0
  double mean_rel_discrepancy = 0.0;
  double max_obs_over_tau_squared = 0.0;
  /// Least-squares slope of log|dtau_obs| against log tau_k; NaN when fewer
  /// than two usable rows or no spread in tau.
  double fitted_exponent = 0.0;
  std::size_t singular_count = 0;
  std::size_t degenerate_count = 0;
};

/// Pairs dtau_k = tau_{k+1} - tau_k with the prediction at the midpoint
/// state of interval k and tau_k, for k = 0..N-3. Throws InvalidInput for
/// fewer than three nodes.
DensityReport compare_observed(const Trajectory& trajectory, const HamiltonianModel& model);

struct HalvingLevel {
  double tau1 = 0.0;
  std::size_t nodes = 0;
  double max_abs_discrepancy = 0.0;
};

struct HalvingStudy {
  std::vector<HalvingLevel> levels;
  double fitted_exponent = 0.0;  // slope of log(max discrepancy) against log(tau1)
};

/// Integrates from x0 to t_end once per tau1 and fits the decay of the
/// largest |observed - predicted| dtau. Integration failures propagate.
HalvingStudy halving_study(const HamiltonianModel& model, const PhasePoint& x0,
                           std::span<const double> tau1s, double t_end,
                           const StepperSettings& settings = {});

/// Least-squares slope of log y against log x over pairs with x, y > 0.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace varistep
