#include "varistep/geometry.hpp"

#include <cmath>

#include "varistep/error.hpp"

namespace varistep {

Matrix symplectic_matrix(int dimension) {
  const int n = dimension;
  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n).setIdentity();
  omega.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return omega;
}

Matrix step_jacobian(const PhaseMap& map, const Vector& x, double h) {
  if (!(h > 0.0)) h = 1e-6 * (1.0 + x.norm());
  Matrix jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vector col = (map(xp) - map(xm)) / ((xp[j] - x[j]) + (x[j] - xm[j]));
    if (j == 0) jac.resize(col.size(), x.size());
    jac.col(j) = col;
  }
  return jac;
}

double symplecticity_residual(const Matrix& jacobian) {
  if (jacobian.rows() != jacobian.cols()) throw InvalidInput("Jacobian must be square");
  if (jacobian.rows() % 2 != 0 || jacobian.rows() == 0) {
    throw InvalidInput("Jacobian must have even, nonzero dimension");
  }
  const Matrix omega = symplectic_matrix(static_cast<int>(jacobian.rows() / 2));
  const Matrix defect = jacobian.transpose() * omega * jacobian - omega;
  return defect.cwiseAbs().rowwise().sum().maxCoeff();
}

PhaseMap fixed_midpoint_map(ModelPtr model, double t, double tau, const SolveSettings& settings) {
  return [model, t, tau, settings](const Vector& x) {
    const StepState s = midpoint_step(*model, PhasePoint::unpack(x, t), tau, settings);
    return s.end.packed();
  };
}

PhaseMap alpha_beta_map(ModelPtr model, const SchemeParams& s, double t, double tau,
                        const SolveSettings& settings) {
  auto lagrangian = scheme_lagrangian(model);
  return [lagrangian, s, t, tau, settings](const Vector& x) {
    return alpha_beta_map_step(*lagrangian, s, PhasePoint::unpack(x, t), tau, settings).packed();
  };
}

PhaseMap variable_step_map(ModelPtr model, double t, double tau1, std::size_t steps,
                           const StepperSettings& settings) {
  return [model, t, tau1, steps, settings](const Vector& x) {
    const IntegrationResult r = integrate_trajectory(*model, PhasePoint::unpack(x, t), tau1,
                                                     StopRule{std::nullopt, steps}, settings);
    if (r.failure) throw Error(r.failure->code, r.failure->message);
    return r.trajectory.node(r.trajectory.size() - 1).packed();
  };
}

IntegrationResult integrate_scheme(ModelPtr model, const SchemeChoice& scheme, const PhasePoint& x0,
                                   double tau, const StopRule& stop,
                                   const StepperSettings& settings) {
  switch (scheme.kind) {
    case SchemeKind::VariableStepMidpoint:
      return integrate_trajectory(*model, x0, tau, stop, settings, StepMode::Variable);
    case SchemeKind::FixedStepMidpoint:
      return integrate_trajectory(*model, x0, tau, stop, settings, StepMode::Fixed);
    case SchemeKind::AlphaBeta:
      return integrate_alpha_beta(model, SchemeParams(scheme.alpha, scheme.beta), x0, tau, stop,
                                  settings.solve);
  }
  throw InvalidInput("unknown scheme kind");
}

SymplecticReport omega_sequence(ModelPtr model, const PhasePoint& x0, double tau,
                                std::size_t steps, const Vector& u, const Vector& v,
                                const SchemeChoice& scheme, const StepperSettings& settings) {
  const int n = x0.dimension();
  if (u.size() != 2 * n || v.size() != 2 * n) throw InvalidInput("variation vectors must be 2n long");
  const Vector x = x0.packed();
  // Parallel variations span no area; reject them outright.
  const double cross = u.norm() * v.norm();
  if (!(cross > 0.0) || std::abs(std::abs(u.dot(v)) - cross) <= 1e-12 * cross) {
    throw InvalidInput("variation vectors must be linearly independent");
  }

  SymplecticReport report;
  report.epsilon = 1e-6 * (1.0 + x.norm());
  const double eps = report.epsilon;

  auto run = [&](const Vector& start) {
    IntegrationResult r =
        integrate_scheme(model, scheme, PhasePoint::unpack(start, x0.t), tau,
                         StopRule{std::nullopt, steps}, settings);
    if (r.failure) throw Error(r.failure->code, r.failure->message);
    return std::move(r.trajectory);
  };
  const Trajectory up = run(x + eps * u);
  const Trajectory um = run(x - eps * u);
  const Trajectory vp = run(x + eps * v);
  const Trajectory vm = run(x - eps * v);

  const Matrix omega = symplectic_matrix(n);
  for (std::size_t k = 0; k <= steps; ++k) {
    const Vector uk = (up.node(k).packed() - um.node(k).packed()) / (2 * eps);
    const Vector vk = (vp.node(k).packed() - vm.node(k).packed()) / (2 * eps);
    report.omega.push_back(uk.dot(omega * vk));
  }
  for (double w : report.omega) {
    report.max_deviation = std::max(report.max_deviation, std::abs(w - report.omega.front()));
  }
  report.relative_deviation = report.max_deviation / std::abs(report.omega.front());
  return report;
}

}  // namespace varistep
