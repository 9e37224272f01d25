#include "varistep/site_density.hpp"

#include <cmath>
#include <limits>

#include "varistep/error.hpp"

namespace varistep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Potential bundle and momentum rescaled so that the kinetic term is w^2/2.
struct Scaled {
  PotentialEval v;
  double w;
};

Scaled scaled(const HamiltonianModel& model, const PhasePoint& x) {
  if (model.dimension() != 1) {
    throw CapabilityError("site density is defined for one degree of freedom only");
  }
  const auto c = model.inverse_mass();
  if (!c) throw CapabilityError(model.name() + " is not separable");
  PotentialEval v = model.potential_bundle(x.q[0], x.t);
  for (double* f : {&v.V, &v.V1, &v.V2, &v.V3, &v.V1t, &v.V2t, &v.Vt}) *f *= *c;
  return {v, *c * x.p[0]};
}

double log_density_argument(const HamiltonianModel& model, const PhasePoint& x) {
  const Scaled s = scaled(model, x);
  const double arg = s.v.V2 * s.w * s.w + s.v.V1 * s.v.V1;
  if (!(arg > 0.0)) {
    throw SingularDomain("V''p^2 + V'^2 = " + std::to_string(arg) + " is not positive");
  }
  return arg;
}

}  // namespace

double predicted_delta_tau(const HamiltonianModel& model, const PhasePoint& x, double tau) {
  const Scaled s = scaled(model, x);
  const PotentialEval& v = s.v;
  const double p = s.w;
  const double num = v.V1t * p * tau + 0.5 * (v.V2t * p * p + v.V3 * p * p * p / 3.0) * tau * tau;
  const double den = 0.5 * (v.V2 * p * p + 3.0 * v.V1t * p + v.V1 * v.V1);
  const double scale =
      0.5 * (std::abs(v.V2 * p * p) + std::abs(3.0 * v.V1t * p) + v.V1 * v.V1);
  if (!(std::abs(den) >= 1e-12 * scale) || scale == 0.0) {
    throw SingularDomain("energy expansion denominator vanishes (" + std::to_string(den) + ")");
  }
  return -num / den;
}

double density_ratio(const HamiltonianModel& model, const PhasePoint& a, const PhasePoint& b) {
  if (!model.autonomous()) throw CapabilityError("density law needs an autonomous model");
  return (std::log(log_density_argument(model, a)) - std::log(log_density_argument(model, b))) /
         3.0;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kNaN;
  const double var = sxx - sx * sx / n;
  if (!(var > 1e-300)) return kNaN;
  return (sxy - sx * sy / n) / var;
}

DensityReport compare_observed(const Trajectory& trajectory, const HamiltonianModel& model) {
  if (trajectory.size() < 3) throw InvalidInput("density comparison needs at least three nodes");
  DensityReport report;
  std::vector<double> taus;
  std::vector<double> obs;
  double rel_sum = 0.0;
  std::size_t rel_count = 0;
  for (std::size_t k = 0; k + 2 < trajectory.size(); ++k) {
    DensityRow row;
    row.k = k;
    row.tau = trajectory.steps[k].tau;
    row.dtau_obs = trajectory.steps[k + 1].tau - row.tau;
    const PhasePoint mid = midpoint(trajectory.node(k), trajectory.node(k + 1));
    try {
      row.dtau_pred = predicted_delta_tau(model, mid, row.tau);
    } catch (const SingularDomain&) {
      row.dtau_pred = kNaN;
      row.flag = "singular";
      ++report.singular_count;
    }
    if (trajectory.steps[k + 1].flags & step_flag::degenerate) {
      row.flag = "degenerate";
      ++report.degenerate_count;
    }
    if (std::isfinite(row.dtau_pred)) {
      const double diff = std::abs(row.dtau_obs - row.dtau_pred);
      report.max_abs_discrepancy = std::max(report.max_abs_discrepancy, diff);
      if (row.dtau_pred != 0.0) {
        const double rel = diff / std::abs(row.dtau_pred);
        report.max_rel_discrepancy = std::max(report.max_rel_discrepancy, rel);
        rel_sum += rel;
        ++rel_count;
      }
    }
    report.max_obs_over_tau_squared =
        std::max(report.max_obs_over_tau_squared, std::abs(row.dtau_obs) / (row.tau * row.tau));
    taus.push_back(row.tau);
    obs.push_back(std::abs(row.dtau_obs));
    report.rows.push_back(std::move(row));
  }
  report.mean_rel_discrepancy = rel_count ? rel_sum / static_cast<double>(rel_count) : 0.0;
  report.fitted_exponent = fit_loglog_slope(taus, obs);
  return report;
}

HalvingStudy halving_study(const HamiltonianModel& model, const PhasePoint& x0,
                           std::span<const double> tau1s, double t_end,
                           const StepperSettings& settings) {
  HalvingStudy study;
  std::vector<double> xs;
  std::vector<double> ys;
  for (double tau1 : tau1s) {
    const IntegrationResult r =
        integrate_trajectory(model, x0, tau1, StopRule{t_end, std::nullopt}, settings);
    if (r.failure) throw Error(r.failure->code, r.failure->message);
    const DensityReport d = compare_observed(r.trajectory, model);
    study.levels.push_back({tau1, r.trajectory.size(), d.max_abs_discrepancy});
    xs.push_back(tau1);
    ys.push_back(d.max_abs_discrepancy);
  }
  study.fitted_exponent = fit_loglog_slope(xs, ys);
  return study;
}

}  // namespace varistep
