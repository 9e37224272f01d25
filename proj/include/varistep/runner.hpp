#pragma once

// Batch operations behind the CLI: integrate a configured run to CSV, or
// run one of the invariant checks and describe the outcome as JSON.

#include <optional>
#include <string>
#include <string_view>

#include "varistep/config.hpp"
#include "varistep/error.hpp"

namespace varistep {

enum class CheckKind { Symplectic, Cohomology, SiteDensity, ElResidual, Legendre };

/// "symplectic", "cohomology", "site-density", "el-residual", "legendre".
std::optional<CheckKind> parse_check_kind(std::string_view name);
std::string_view check_name(CheckKind kind);

struct RunOutcome {
  /// Set when the integration stopped early; the report then holds the
  /// diagnostic and any CSV holds the nodes computed so far.
  std::optional<ErrorCode> failure;
  /// For checks: every asserted invariant held.
  bool pass = true;
  std::string report;  // JSON document
};

/// Integrates and writes the trajectory CSV to `csv_path` (falls back to
/// config.csv_path; no file when both are empty). Errors raised before the
/// first step (model capabilities, I/O) propagate as exceptions.
RunOutcome run_integrate(const RunConfig& config, const std::string& csv_path = {});

/// Runs one check. `out_path` receives the per-step CSV of the site-density
/// check and is ignored by the others. Throws CapabilityError when the check
/// does not apply to the configured model or scheme.
RunOutcome run_check(const RunConfig& config, CheckKind kind, const std::string& out_path = {});

}  // namespace varistep
