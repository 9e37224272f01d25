#include "varistep/stepper.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

namespace varistep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Residual of the midpoint equations for the interval start -> end.
void midpoint_residual(const HamiltonianModel& model, const PhasePoint& start,
                       const PhasePoint& end, double tau, Eigen::Ref<Vector> out) {
  const int n = start.dimension();
  const HamiltonianEval h = model.evaluate(midpoint(start, end), partial::grad_p | partial::grad_q);
  out.head(n) = (end.q - start.q) / tau - h.grad_p;
  out.tail(n) = (end.p - start.p) / tau + h.grad_q;
}

// H at the midpoint of a -> b with the time argument replaced by t.
double energy_at(const HamiltonianModel& model, const PhasePoint& a, const PhasePoint& b,
                 double t) {
  PhasePoint m = midpoint(a, b);
  m.t = t;
  return model.energy(m);
}

Vector pack_qp(const PhasePoint& x) {
  Vector z(2 * x.dimension());
  z << x.q, x.p;
  return z;
}

struct CoupledAttempt {
  StepState step;
  bool in_range = false;
};

}  // namespace

void StepperSettings::validate() const {
  solve.validate();
  if (!(probe > 0.0 && probe < 0.5)) throw InvalidInput("probe must lie in (0, 0.5)");
  if (!(degeneracy_tol >= 0.0)) throw InvalidInput("degeneracy tolerance must be nonnegative");
  if (!(guard > 1.0)) throw InvalidInput("step guard must exceed 1");
}

std::string format_flags(unsigned flags) {
  static const std::pair<unsigned, const char*> names[] = {
      {step_flag::bootstrap, "bootstrap"},
      {step_flag::degenerate, "degenerate"},
      {step_flag::retried, "retried"},
      {step_flag::fixed, "fixed"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (!(flags & bit)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

void record_energies(const HamiltonianModel& model, StepState& s, const StepState* prev) {
  s.e_mid = model.energy(midpoint(s.start, s.end));
  if (prev) {
    const double tbar_prev = prev->start.t + 0.5 * prev->tau;
    s.energy_residual = energy_at(model, s.start, s.end, tbar_prev) - prev->e_mid;
  } else {
    s.energy_residual = kNaN;
  }
}

PhasePoint midpoint(const PhasePoint& a, const PhasePoint& b) {
  return PhasePoint{0.5 * (a.q + b.q), 0.5 * (a.p + b.p), 0.5 * (a.t + b.t)};
}

StepState midpoint_step(const HamiltonianModel& model, const PhasePoint& start, double tau,
                        const SolveSettings& settings, const std::optional<PhasePoint>& guess) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("step length must be positive");
  const int n = start.dimension();
  const double t1 = start.t + tau;

  Vector z0;
  if (guess) {
    z0 = pack_qp(*guess);
  } else {
    const HamiltonianEval h = model.evaluate(start, partial::grad_p | partial::grad_q);
    z0.resize(2 * n);
    z0 << start.q + tau * h.grad_p, start.p - tau * h.grad_q;
  }
  auto residual = [&](const Vector& z) {
    Vector r(2 * n);
    midpoint_residual(model, start, PhasePoint{z.head(n), z.tail(n), t1}, tau, r);
    return r;
  };
  const SolveResult sol = solve_newton(residual, z0, settings);

  StepState s;
  s.start = start;
  s.end = PhasePoint{sol.x.head(n), sol.x.tail(n), t1};
  s.tau = tau;
  s.newton_iterations = sol.iterations;
  return s;
}

StepState bootstrap_step(const HamiltonianModel& model, const PhasePoint& x0, double tau1,
                         const StepperSettings& settings) {
  settings.validate();
  if (!(tau1 > 0.0) || !std::isfinite(tau1)) throw InvalidInput("tau1 must be positive");
  StepState s = midpoint_step(model, x0, tau1, settings.solve);
  s.k = 0;
  s.flags = step_flag::bootstrap;
  record_energies(model, s, nullptr);
  return s;
}

StepState coupled_step(const HamiltonianModel& model, const StepState& prev,
                       const StepperSettings& settings) {
  settings.validate();
  const int n = prev.end.dimension();
  const PhasePoint& a = prev.end;
  const double tau_k = prev.tau;
  const double tbar_prev = prev.start.t + 0.5 * tau_k;
  const double e_prev = prev.e_mid;

  auto energy_gap = [&](const StepState& s) {
    return energy_at(model, s.start, s.end, tbar_prev) - e_prev;
  };

  // Fixed-length solve at the old tau; it seeds the coupled solve and is the
  // answer when the energy equation does not depend on tau.
  const StepState predictor = midpoint_step(model, a, tau_k, settings.solve);

  const double dt = settings.probe * tau_k;
  const StepState plus = midpoint_step(model, a, tau_k + dt, settings.solve, predictor.end);
  const StepState minus = midpoint_step(model, a, tau_k - dt, settings.solve, predictor.end);
  const double slope = (energy_gap(plus) - energy_gap(minus)) / (2 * dt);
  const double scale = std::max(std::abs(e_prev), DBL_MIN);
  if (std::abs(slope) < settings.degeneracy_tol * scale / tau_k) {
    StepState s = predictor;
    s.k = prev.k + 1;
    s.flags = step_flag::degenerate;
    record_energies(model, s, &prev);
    return s;
  }

  auto residual = [&](const Vector& z) {
    const double tau = z[2 * n];
    const PhasePoint b{z.head(n), z.segment(n, n), a.t + tau};
    Vector r(2 * n + 1);
    midpoint_residual(model, a, b, tau, r.head(2 * n));
    r[2 * n] = energy_at(model, a, b, tbar_prev) - e_prev;
    return r;
  };

  auto attempt = [&](const StepState& seed) {
    Vector z0(2 * n + 1);
    z0 << seed.end.q, seed.end.p, seed.tau;
    const SolveResult sol = solve_newton(residual, z0, settings.solve);
    CoupledAttempt out;
    out.step.k = prev.k + 1;
    out.step.start = a;
    out.step.tau = sol.x[2 * n];
    out.step.end = PhasePoint{sol.x.head(n), sol.x.segment(n, n), a.t + out.step.tau};
    out.step.newton_iterations = seed.newton_iterations + sol.iterations;
    out.in_range =
        out.step.tau >= tau_k / settings.guard && out.step.tau <= tau_k * settings.guard;
    return out;
  };

  CoupledAttempt first;
  bool first_ok = false;
  try {
    first = attempt(predictor);
    first_ok = first.in_range;
  } catch (const NoConvergence&) {
  } catch (const SingularSystem&) {
  }
  if (first_ok) {
    record_energies(model, first.step, &prev);
    return first.step;
  }

  // One retry from a seed taken at a slightly longer step.
  const StepState seed = midpoint_step(model, a, tau_k * 1.05, settings.solve, predictor.end);
  CoupledAttempt second = attempt(seed);
  second.step.flags |= step_flag::retried;
  if (!(second.step.tau > 0.0)) {
    throw NonpositiveStep("solved step length " + std::to_string(second.step.tau) +
                          " is not positive at step " + std::to_string(prev.k + 1));
  }
  if (!second.in_range) {
    throw StepRejected("solved step length " + std::to_string(second.step.tau) +
                       " outside the accepted range around " + std::to_string(tau_k) +
                       " at step " + std::to_string(prev.k + 1));
  }
  record_energies(model, second.step, &prev);
  return second.step;
}

PhasePoint Trajectory::node(std::size_t k) const { return PhasePoint{q.at(k), p.at(k), t.at(k)}; }

GridPtr Trajectory::grid() const { return std::make_shared<const Grid>(t); }

GridFunction Trajectory::q_function() const { return GridFunction(grid(), q); }

GridFunction Trajectory::p_function() const { return GridFunction(grid(), p); }

void Trajectory::start(const PhasePoint& x0) {
  t.assign(1, x0.t);
  q.assign(1, x0.q);
  p.assign(1, x0.p);
  steps.clear();
}

void Trajectory::append(StepState step) {
  t.push_back(step.end.t);
  q.push_back(step.end.q);
  p.push_back(step.end.p);
  step.start = PhasePoint{};
  step.end = PhasePoint{};
  steps.push_back(std::move(step));
}

IntegrationResult drive_steps(const PhasePoint& x0, const StopRule& stop, std::size_t step_limit,
                              const std::function<StepState()>& first,
                              const std::function<StepState(const StepState&)>& next) {
  if (!stop.t_end && !stop.max_steps) throw InvalidInput("a stop rule is required");
  IntegrationResult result;
  Trajectory& traj = result.trajectory;
  traj.start(x0);

  auto done = [&](const StepState& s) {
    if (stop.t_end && s.end.t >= *stop.t_end) return true;
    return stop.max_steps && traj.steps.size() >= *stop.max_steps;
  };
  if ((stop.t_end && x0.t >= *stop.t_end) || (stop.max_steps && *stop.max_steps == 0)) {
    return result;
  }

  StepState current;
  try {
    current = first();
  } catch (const Error& e) {
    result.failure = IntegrationFailure{e.code(), e.what(), 0};
    return result;
  }
  traj.append(current);
  while (!done(current)) {
    if (traj.steps.size() >= step_limit) {
      result.failure = IntegrationFailure{ErrorCode::StepRejected,
                                          "step limit reached before the stop rule was met",
                                          traj.steps.size()};
      break;
    }
    try {
      current = next(current);
    } catch (const Error& e) {
      result.failure = IntegrationFailure{e.code(), e.what(), traj.steps.size()};
      break;
    }
    traj.append(current);
  }
  return result;
}

IntegrationResult integrate_trajectory(const HamiltonianModel& model, const PhasePoint& x0,
                                       double tau1, const StopRule& stop,
                                       const StepperSettings& settings, StepMode mode) {
  settings.validate();
  if (!(tau1 > 0.0) || !std::isfinite(tau1)) throw InvalidInput("tau1 must be positive");
  if (x0.q.size() != model.dimension() || x0.p.size() != model.dimension()) {
    throw InvalidInput("initial state dimension does not match the model");
  }
  auto first = [&] { return bootstrap_step(model, x0, tau1, settings); };
  if (mode == StepMode::Variable) {
    return drive_steps(x0, stop, settings.step_limit, first,
                       [&](const StepState& prev) { return coupled_step(model, prev, settings); });
  }
  return drive_steps(x0, stop, settings.step_limit, first, [&](const StepState& prev) {
    StepState s = midpoint_step(model, prev.end, tau1, settings.solve);
    s.k = prev.k + 1;
    s.flags = step_flag::fixed;
    record_energies(model, s, &prev);
    return s;
  });
}

}  // namespace varistep
