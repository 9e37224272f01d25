#pragma once

// Run configuration documents (JSON). Schema:
//
//   {
//     "model":   {"builtin": NAME, "params": {KEY: NUMBER, ...}}
//              | {"hamiltonian_expr": SOURCE, "dimension": N},
//     "initial": {"q": NUMBER | [NUMBER, ...], "p": ..., "t": NUMBER},
//     "tau1":    NUMBER,
//     "stop":    {"t_end": NUMBER} | {"max_steps": INTEGER},
//     "scheme":  {"kind": "variable-step-midpoint" | "fixed-step-midpoint"
//                       | "alpha-beta", "alpha": NUMBER, "beta": NUMBER},
//     "solver":  {"tolerance": NUMBER, "max_iterations": INTEGER},
//     "output":  {"csv": PATH},
//     "checks":  {"samples": INTEGER, "steps": INTEGER, "seed": INTEGER}
//   }
//
// "model", "initial", "tau1" and "stop" are required. Unknown keys are
// rejected so that typos do not silently fall back to defaults.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "varistep/geometry.hpp"
#include "varistep/model.hpp"
#include "varistep/stepper.hpp"

namespace varistep {

struct ModelSpec {
  std::string builtin;     // empty when `expression` is used
  ParamMap params;
  std::string expression;  // hamiltonian_expr source
  int dimension = 1;
};

struct CheckSettings {
  std::size_t samples = 50;  // random states for the symplectic check
  std::size_t steps = 100;   // intervals for the cohomology check
  std::uint64_t seed = 1;
};

struct RunConfig {
  ModelSpec model;
  PhasePoint initial;
  double tau1 = 0.0;
  StopRule stop;
  SchemeChoice scheme;
  StepperSettings stepper;
  std::string csv_path;
  CheckSettings checks;
};

/// Throws ConfigError on malformed JSON or schema violations, and the model
/// construction error (ConfigError, ParseError, NameError) for a bad model.
RunConfig parse_config(std::string_view json_text);

ModelPtr make_model(const ModelSpec& spec);

std::vector<std::string> preset_names();
/// JSON text of a preset. Throws ConfigError for an unknown name.
std::string preset_config(std::string_view name);

}  // namespace varistep
