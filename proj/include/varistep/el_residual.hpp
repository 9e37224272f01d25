#pragma once

// Residuals of the discrete Euler-Lagrange system for a Lagrangian that
// depends on the jet v_0..v_l of a grid trajectory.
//
// With B f^(k) = -(f^(k) - f^(k-1))/tau_k and D_m = dL/dv_m:
//
//   lambda_m = sum_{h=0}^{l-m} B^h D_{m+h}
//   EL       = D_0 + sum_{h=1}^{l} B^h D_h
//   E^(k)    = sum_m lambda_m^(k) . v_m^(k) - L^(k)
//   energy   = Delta_k E^(k) + (L(jet^(k+1); ctx_{k+1}) - L(jet^(k+1); ctx_k))/tau_k
//
// Each residual lives on the nodes where every shift it needs exists:
// EL on [l, N-l), lambda_m on [l-m, N-l), energy on [l-1, N-l-1).

#include <vector>

#include "varistep/grid.hpp"
#include "varistep/model.hpp"

namespace varistep {

struct ElResidualReport {
  JetTrajectory jet;  // lambda_1..lambda_l filled in
  GridFunction el;
  /// lambda_m - (D_m + B lambda_{m+1}) for m = 1..l-1.
  std::vector<GridFunction> multiplier;
  GridFunction energy;
  double max_el = 0.0;
  double max_multiplier = 0.0;
  double max_energy = 0.0;
};

/// Interval contexts {t_k, tau_k} are read from the jet's grid. Throws
/// InvalidGrid when the grid has fewer than 2l+1 nodes and InvalidInput when
/// the Lagrangian's order or dimension does not match the jet.
ElResidualReport higher_order_el_residual(const LagrangianModel& lagrangian,
                                          const JetTrajectory& jet);

/// Largest absolute entry of f over its defined window.
double max_abs(const GridFunction& f);

}  // namespace varistep
