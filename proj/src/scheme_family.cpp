#include "varistep/scheme_family.hpp"

#include <cmath>

#include "varistep/error.hpp"

namespace varistep {
namespace {

struct Partials {
  Vector lx;
  Vector lv;
};

// Slots of L^(k) for the interval a -> b.
std::vector<Vector> slots(const SchemeParams& s, const Vector& qa, const Vector& qb, double tau) {
  return {s.alpha() * qa + s.beta() * qb, (qb - qa) / tau};
}

Partials partials(const LagrangianModel& lagrangian, const SchemeParams& s, const Vector& qa,
                  const Vector& qb, double t, double tau) {
  const std::vector<Vector> v = slots(s, qa, qb, tau);
  const IntervalContext ctx{t, tau};
  return {lagrangian.partial(0, v, ctx), lagrangian.partial(1, v, ctx)};
}

void require_first_order(const LagrangianModel& lagrangian) {
  if (lagrangian.order() != 1) throw InvalidInput("alpha/beta schemes need a first-order Lagrangian");
}

void require_steps(const SchemeWindow& w) {
  if (!(w.tau > 0.0) || !(w.tau_prev > 0.0)) throw InvalidInput("step lengths must be positive");
}

}  // namespace

SchemeParams::SchemeParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || std::abs(alpha + beta - 1.0) > 1e-14) {
    throw InvalidInput("alpha + beta must equal 1 (got " + std::to_string(alpha) + " + " +
                       std::to_string(beta) + ")");
  }
}

std::shared_ptr<const LagrangianModel> scheme_lagrangian(ModelPtr model) {
  return std::make_shared<SeparableLagrangian>(std::move(model), 0.0);
}

Vector alpha_beta_el_residual(const LagrangianModel& lagrangian, const SchemeParams& s,
                              const SchemeWindow& w) {
  require_first_order(lagrangian);
  require_steps(w);
  if (w.q_next.size() != w.q.size()) throw InvalidInput("window needs q_next");
  const Partials prev = partials(lagrangian, s, w.q_prev, w.q, w.t_prev, w.tau_prev);
  const Partials cur = partials(lagrangian, s, w.q, w.q_next, w.t, w.tau);
  return s.alpha() * cur.lx + (w.tau_prev / w.tau) * s.beta() * prev.lx -
         (cur.lv - prev.lv) / w.tau;
}

Vector alpha_beta_el_step(const LagrangianModel& lagrangian, const SchemeParams& s,
                          const SchemeWindow& w, const SolveSettings& settings) {
  require_first_order(lagrangian);
  require_steps(w);
  SchemeWindow trial = w;
  auto residual = [&](const Vector& q_next) {
    trial.q_next = q_next;
    return alpha_beta_el_residual(lagrangian, s, trial);
  };
  const Vector guess = w.q + (w.tau / w.tau_prev) * (w.q - w.q_prev);
  return solve_newton(residual, guess, settings).x;
}

std::pair<Vector, Vector> discrete_legendre(const LagrangianModel& lagrangian,
                                            const SchemeParams& s, const SchemeWindow& w) {
  require_first_order(lagrangian);
  require_steps(w);
  if (w.q_next.size() != w.q.size()) throw InvalidInput("window needs q_next");
  const Partials prev = partials(lagrangian, s, w.q_prev, w.q, w.t_prev, w.tau_prev);
  const Partials cur = partials(lagrangian, s, w.q, w.q_next, w.t, w.tau);
  return {prev.lv + w.tau_prev * s.beta() * prev.lx, cur.lv + w.tau * s.beta() * cur.lx};
}

double discrete_hamiltonian(const LagrangianModel& lagrangian, const SchemeParams& s,
                            const SchemeWindow& w, const std::pair<Vector, Vector>& momenta) {
  require_first_order(lagrangian);
  if (w.q_next.size() != w.q.size()) throw InvalidInput("window needs q_next");
  const std::vector<Vector> v = slots(s, w.q, w.q_next, w.tau);
  const Vector lam = s.alpha() * momenta.second + s.beta() * momenta.first;
  return lam.dot(v[1]) - lagrangian.value(v, IntervalContext{w.t, w.tau});
}

PhasePoint alpha_beta_map_step(const LagrangianModel& lagrangian, const SchemeParams& s,
                               const PhasePoint& x, double tau, const SolveSettings& settings,
                               int* iterations) {
  require_first_order(lagrangian);
  if (!(tau > 0.0)) throw InvalidInput("step length must be positive");
  auto residual = [&](const Vector& q_next) {
    const Partials d = partials(lagrangian, s, x.q, q_next, x.t, tau);
    return Vector(x.p + s.alpha() * tau * d.lx - d.lv);
  };
  const SolveResult sol = solve_newton(residual, x.q, settings);
  if (iterations) *iterations = sol.iterations;
  const Vector& q_next = sol.x;
  const Partials d = partials(lagrangian, s, x.q, q_next, x.t, tau);
  return PhasePoint{q_next, x.p + tau * d.lx, x.t + tau};
}

Vector canonical_residual(const LagrangianModel& lagrangian, const SchemeParams& s,
                          const PhasePoint& a, const PhasePoint& b) {
  require_first_order(lagrangian);
  const double tau = b.t - a.t;
  if (!(tau > 0.0)) throw InvalidInput("interval must have positive length");
  const Partials d = partials(lagrangian, s, a.q, b.q, a.t, tau);
  const Eigen::Index n = a.q.size();
  Vector r(2 * n);
  r.head(n) = (b.p - a.p) / tau - d.lx;
  r.tail(n) = s.alpha() * b.p + s.beta() * a.p - d.lv;
  return r;
}

GridFunction alpha_beta_el_residual(const LagrangianModel& lagrangian, const SchemeParams& s,
                                    const GridFunction& q) {
  const Grid& grid = *q.grid();
  if (q.first() != 0 || q.last() != grid.size()) throw InvalidInput("q must be defined everywhere");
  if (grid.size() < 3) throw InvalidGrid("need at least three nodes");
  std::vector<Vector> out(grid.size());
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    const SchemeWindow w{q[k - 1],        q[k],         q[k + 1],        grid.node(k - 1),
                         grid.node(k), grid.step(k - 1), grid.step(k)};
    out[k] = alpha_beta_el_residual(lagrangian, s, w);
  }
  return GridFunction(q.grid(), std::move(out), 1, grid.size() - 1);
}

IntegrationResult integrate_alpha_beta(ModelPtr model, const SchemeParams& s, const PhasePoint& x0,
                                       double tau, const StopRule& stop,
                                       const SolveSettings& settings) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("tau must be positive");
  const auto lagrangian = scheme_lagrangian(model);
  auto step = [&](const PhasePoint& start, std::size_t k, const StepState* prev) {
    StepState st;
    st.k = k;
    st.start = start;
    st.end = alpha_beta_map_step(*lagrangian, s, start, tau, settings, &st.newton_iterations);
    st.tau = tau;
    st.flags = step_flag::fixed | (prev ? 0u : step_flag::bootstrap);
    record_energies(*model, st, prev);
    return st;
  };
  return drive_steps(
      x0, stop, 100'000'000, [&] { return step(x0, 0, nullptr); },
      [&](const StepState& prev) { return step(prev.end, prev.k + 1, &prev); });
}

}  // namespace varistep
