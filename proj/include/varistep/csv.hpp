#pragma once

// Trajectory CSV format, one row per node:
//
//   k,t,tau,q,p,E_mid,energy_residual,newton_iters,flags              (n = 1)
//   k,t,tau,q_1,...,q_n,p_1,...,p_n,E_mid,energy_residual,newton_iters,flags
//
// tau, E_mid, energy_residual, newton_iters and flags describe the interval
// that starts at the node, so they are empty on the last row;
// energy_residual is also empty on the first row. Numbers are written in the
// shortest form that parses back to the same double. Flags are joined
// with '|'.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "varistep/site_density.hpp"
#include "varistep/stepper.hpp"

namespace varistep {

/// Shortest round-trip decimal; NaN is written as an empty field.
std::string format_double(double value);

std::vector<std::string> trajectory_csv_header(int dimension);

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
/// Throws IoError when the file cannot be written.
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);

/// Inverse of write_trajectory_csv. Throws InvalidInput on a malformed
/// header or row.
Trajectory read_trajectory_csv(std::istream& in);

/// Columns k,tau_k,dtau_obs,dtau_pred,flag.
void write_density_csv(const DensityReport& report, std::ostream& out);
void write_density_csv(const DensityReport& report, const std::string& path);

}  // namespace varistep
