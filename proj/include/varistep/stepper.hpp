#pragma once

// Variable-step implicit midpoint integrator.
//
// Every interval [t_k, t_{k+1}] satisfies the implicit midpoint equations
//
//   (q_{k+1} - q_k)/tau_k =  dH/dp(mid_k; tbar_k)
//   (p_{k+1} - p_k)/tau_k = -dH/dq(mid_k; tbar_k),   tbar_k = t_k + tau_k/2,
//
// where mid_k is the average of the two end states. The first step length
// is supplied by the caller. Every later step length is an unknown fixed by
// the discrete energy equation
//
//   H(mid_{k+1}; tbar_k) = H(mid_k; tbar_k),
//
// whose time argument is frozen at the previous interval's midpoint on both
// sides. When H is quadratic the energy equation holds for every tau and
// the step falls back to tau_{k+1} = tau_k with the `degenerate` flag set.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "varistep/error.hpp"
#include "varistep/model.hpp"
#include "varistep/newton.hpp"

namespace varistep {

struct StepperSettings {
  SolveSettings solve;
  /// Relative tau offset used to probe the energy equation's tau-dependence.
  double probe = 0.01;
  /// A step is degenerate when |d(energy residual)/d tau| falls below
  /// degeneracy_tol * |E| / tau.
  double degeneracy_tol = 1e-10;
  /// Accepted step lengths lie in [tau_k/guard, guard*tau_k].
  double guard = 10.0;
  /// Hard cap on the number of steps when integrating to t_end.
  std::size_t step_limit = 10'000'000;

  void validate() const;
};

namespace step_flag {
inline constexpr unsigned bootstrap = 1u << 0;
inline constexpr unsigned degenerate = 1u << 1;
inline constexpr unsigned retried = 1u << 2;
inline constexpr unsigned fixed = 1u << 3;
}  // namespace step_flag

/// "bootstrap|degenerate" style rendering; empty for no flags.
std::string format_flags(unsigned flags);

/// One solved interval, node k to node k+1.
struct StepState {
  std::size_t k = 0;
  PhasePoint start;
  PhasePoint end;
  double tau = 0.0;
  /// H(mid_k; tbar_k).
  double e_mid = 0.0;
  /// H(mid_k; tbar_{k-1}) - H(mid_{k-1}; tbar_{k-1}); NaN for the first step.
  double energy_residual = 0.0;
  int newton_iterations = 0;
  unsigned flags = 0;
};

/// Midpoint of two phase points, including time.
PhasePoint midpoint(const PhasePoint& a, const PhasePoint& b);

/// Fills e_mid and energy_residual of `s` from its end states; `prev` is
/// null for the first interval.
void record_energies(const HamiltonianModel& model, StepState& s, const StepState* prev);

/// Implicit midpoint step of fixed length tau from `start`, Newton started
/// from the explicit Euler predictor unless a guess is given.
StepState midpoint_step(const HamiltonianModel& model, const PhasePoint& start, double tau,
                        const SolveSettings& settings = {},
                        const std::optional<PhasePoint>& guess = std::nullopt);

/// First interval with the user-chosen tau1. Throws InvalidInput if tau1 <= 0.
StepState bootstrap_step(const HamiltonianModel& model, const PhasePoint& x0, double tau1,
                         const StepperSettings& settings = {});

/// Next interval with its length solved from the energy equation.
/// Throws NoConvergence, SingularSystem, NonpositiveStep or StepRejected.
StepState coupled_step(const HamiltonianModel& model, const StepState& prev,
                       const StepperSettings& settings = {});

struct StopRule {
  std::optional<double> t_end;
  std::optional<std::size_t> max_steps;
};

/// Nodes and per-interval records of an integration. steps[k] describes the
/// interval from node k to node k+1.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> q;
  std::vector<Vector> p;
  std::vector<StepState> steps;  // start/end cleared to save memory

  std::size_t size() const noexcept { return t.size(); }
  int dimension() const noexcept { return q.empty() ? 0 : static_cast<int>(q.front().size()); }
  PhasePoint node(std::size_t k) const;

  /// Throws InvalidGrid for fewer than two nodes.
  GridPtr grid() const;
  GridFunction q_function() const;
  GridFunction p_function() const;

  void start(const PhasePoint& x0);
  void append(StepState step);
};

struct IntegrationFailure {
  ErrorCode code;
  std::string message;
  std::size_t step;  // index of the interval that failed
};

/// A failed run keeps every node computed before the failure.
struct IntegrationResult {
  Trajectory trajectory;
  std::optional<IntegrationFailure> failure;

  bool ok() const noexcept { return !failure; }
};

enum class StepMode { Variable, Fixed };

/// Bootstrap then repeated coupled (or fixed-length) steps until t >= t_end
/// or max_steps intervals exist.
IntegrationResult integrate_trajectory(const HamiltonianModel& model, const PhasePoint& x0,
                                       double tau1, const StopRule& stop,
                                       const StepperSettings& settings = {},
                                       StepMode mode = StepMode::Variable);

/// Driver loop shared by every scheme: `first()` produces interval 0 and
/// `next(prev)` each following one. Library errors end the run and are
/// recorded in the result.
IntegrationResult drive_steps(const PhasePoint& x0, const StopRule& stop, std::size_t step_limit,
                              const std::function<StepState()>& first,
                              const std::function<StepState(const StepState&)>& next);

}  // namespace varistep
