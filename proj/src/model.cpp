#include "varistep/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varistep/error.hpp"

namespace varistep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_jet(std::span<const Vector> v, int dimension, int order) {
  if (static_cast<int>(v.size()) != order + 1) {
    throw InvalidInput("Lagrangian expects " + std::to_string(order + 1) + " jet slots, got " +
                       std::to_string(v.size()));
  }
  for (const Vector& slot : v) {
    if (slot.size() != dimension) throw InvalidInput("jet slot has wrong dimension");
  }
}

double separable_c(const ModelPtr& model) {
  if (!model) throw InvalidInput("null model");
  const auto c = model->inverse_mass();
  if (!c) throw CapabilityError(model->name() + " is not separable");
  if (!(*c > 0.0)) throw InvalidInput("inverse mass must be positive");
  return *c;
}

// Fourth-order central difference of a scalar function. The step only grows
// once rounding of x + h would dominate, so that large times t do not inflate
// the truncation error.
template <typename F>
double central4(F&& f, double x) {
  const double h = 1e-3 * std::max(1.0, 1e-4 * std::abs(x));
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double rel_error(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
}

}  // namespace

Vector PhasePoint::packed() const {
  Vector x(q.size() + p.size());
  x << p, q;
  return x;
}

PhasePoint PhasePoint::unpack(const Vector& pq, double t) {
  if (pq.size() % 2 != 0) throw InvalidInput("packed phase vector has odd length");
  const Eigen::Index n = pq.size() / 2;
  return PhasePoint{pq.tail(n), pq.head(n), t};
}

HamiltonianEval HamiltonianModel::evaluate(const PhasePoint& x, unsigned request) const {
  if (x.q.size() != dimension() || x.p.size() != dimension()) {
    throw InvalidInput("phase point dimension does not match model dimension " +
                       std::to_string(dimension()));
  }
  return do_evaluate(x, request);
}

PotentialEval HamiltonianModel::potential_bundle(double q, double t, unsigned request) const {
  const unsigned missing = request & ~potential_capabilities();
  if (missing != 0) {
    throw CapabilityError(name() + " does not provide the requested potential derivatives");
  }
  return do_potential(q, t, request);
}

PotentialEval HamiltonianModel::do_potential(double, double, unsigned) const {
  throw CapabilityError(name() + " has no potential bundle");
}

SeparableHamiltonian::SeparableHamiltonian(int dimension, double inverse_mass)
    : dimension_(dimension), inverse_mass_(inverse_mass) {
  if (dimension < 1) throw ConfigError("dimension must be at least 1");
  if (!(inverse_mass > 0.0) || !std::isfinite(inverse_mass)) {
    throw ConfigError("mass must be positive and finite");
  }
}

HamiltonianEval SeparableHamiltonian::do_evaluate(const PhasePoint& x, unsigned request) const {
  HamiltonianEval out{kNaN, {}, {}, kNaN};
  if (request & partial::value) {
    out.value = 0.5 * inverse_mass_ * x.p.squaredNorm() + potential_value(x.q, x.t);
  }
  if (request & partial::grad_p) out.grad_p = inverse_mass_ * x.p;
  if (request & partial::grad_q) out.grad_q = potential_gradient(x.q, x.t);
  if (request & partial::time) out.time = potential_time_derivative(x.q, x.t);
  return out;
}

double DerivativeCheck::worst() const { return std::max({grad_p, grad_q, time, bundle}); }

DerivativeCheck check_derivatives(const HamiltonianModel& model,
                                  std::span<const PhasePoint> points) {
  DerivativeCheck out;
  const int n = model.dimension();
  for (const PhasePoint& x : points) {
    const HamiltonianEval a = model.evaluate(x);
    for (int i = 0; i < n; ++i) {
      const double fd_p = central4(
          [&](double s) {
            PhasePoint y = x;
            y.p[i] = s;
            return model.energy(y);
          },
          x.p[i]);
      const double fd_q = central4(
          [&](double s) {
            PhasePoint y = x;
            y.q[i] = s;
            return model.energy(y);
          },
          x.q[i]);
      out.grad_p = std::max(out.grad_p, rel_error(a.grad_p[i], fd_p));
      out.grad_q = std::max(out.grad_q, rel_error(a.grad_q[i], fd_q));
    }
    const double fd_t = central4(
        [&](double s) {
          PhasePoint y = x;
          y.t = s;
          return model.energy(y);
        },
        x.t);
    out.time = std::max(out.time, rel_error(a.time, fd_t));

    if (n == 1 && model.potential_capabilities() == potential::all) {
      const double q = x.q[0];
      const double t = x.t;
      const PotentialEval b = model.potential_bundle(q, t);
      auto in_q = [&](double PotentialEval::*field) {
        return central4([&](double s) { return model.potential_bundle(s, t).*field; }, q);
      };
      auto in_t = [&](double PotentialEval::*field) {
        return central4([&](double s) { return model.potential_bundle(q, s).*field; }, t);
      };
      const double errs[] = {
          rel_error(b.V1, in_q(&PotentialEval::V)),   rel_error(b.V2, in_q(&PotentialEval::V1)),
          rel_error(b.V3, in_q(&PotentialEval::V2)),  rel_error(b.Vt, in_t(&PotentialEval::V)),
          rel_error(b.V1t, in_t(&PotentialEval::V1)), rel_error(b.V2t, in_t(&PotentialEval::V2)),
      };
      for (double e : errs) out.bundle = std::max(out.bundle, e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

SeparableLagrangian::SeparableLagrangian(ModelPtr model, double time_weight)
    : model_(std::move(model)), c_(separable_c(model_)), time_weight_(time_weight) {}

int SeparableLagrangian::dimension() const { return model_->dimension(); }

double SeparableLagrangian::value(std::span<const Vector> v, const IntervalContext& ctx) const {
  require_jet(v, dimension(), 1);
  const PhasePoint x{v[0], Vector::Zero(dimension()), ctx.t + time_weight_ * ctx.tau};
  return v[1].squaredNorm() / (2 * c_) - model_->energy(x);
}

Vector SeparableLagrangian::partial(int m, std::span<const Vector> v,
                                    const IntervalContext& ctx) const {
  require_jet(v, dimension(), 1);
  if (m == 1) return v[1] / c_;
  if (m != 0) throw InvalidInput("jet slot out of range");
  const PhasePoint x{v[0], Vector::Zero(dimension()), ctx.t + time_weight_ * ctx.tau};
  return -model_->evaluate(x, partial::grad_q).grad_q;
}

double SeparableLagrangian::time_partial(std::span<const Vector> v,
                                         const IntervalContext& ctx) const {
  require_jet(v, dimension(), 1);
  const PhasePoint x{v[0], Vector::Zero(dimension()), ctx.t + time_weight_ * ctx.tau};
  return -model_->evaluate(x, partial::time).time;
}

MidpointLagrangian::MidpointLagrangian(ModelPtr model)
    : model_(std::move(model)), c_(separable_c(model_)) {}

int MidpointLagrangian::dimension() const { return model_->dimension(); }

double MidpointLagrangian::value(std::span<const Vector> v, const IntervalContext& ctx) const {
  require_jet(v, dimension(), 1);
  const PhasePoint x{v[0] + 0.5 * ctx.tau * v[1], Vector::Zero(dimension()),
                     ctx.t + 0.5 * ctx.tau};
  return v[1].squaredNorm() / (2 * c_) - model_->energy(x);
}

Vector MidpointLagrangian::partial(int m, std::span<const Vector> v,
                                   const IntervalContext& ctx) const {
  require_jet(v, dimension(), 1);
  if (m != 0 && m != 1) throw InvalidInput("jet slot out of range");
  const PhasePoint x{v[0] + 0.5 * ctx.tau * v[1], Vector::Zero(dimension()),
                     ctx.t + 0.5 * ctx.tau};
  const Vector grad = model_->evaluate(x, partial::grad_q).grad_q;
  if (m == 0) return -grad;
  return v[1] / c_ - 0.5 * ctx.tau * grad;
}

double MidpointLagrangian::time_partial(std::span<const Vector> v,
                                        const IntervalContext& ctx) const {
  require_jet(v, dimension(), 1);
  const PhasePoint x{v[0] + 0.5 * ctx.tau * v[1], Vector::Zero(dimension()),
                     ctx.t + 0.5 * ctx.tau};
  return -model_->evaluate(x, partial::time).time;
}

FunctionLagrangian::FunctionLagrangian(int dimension, int order, ValueFn value, PartialFn partial,
                                       ValueFn time_partial)
    : dimension_(dimension),
      order_(order),
      value_(std::move(value)),
      partial_(std::move(partial)),
      time_partial_(std::move(time_partial)) {
  if (dimension < 1 || order < 1) throw InvalidInput("Lagrangian needs dimension, order >= 1");
  if (!value_ || !partial_) throw InvalidInput("Lagrangian callbacks must be set");
}

double FunctionLagrangian::value(std::span<const Vector> v, const IntervalContext& ctx) const {
  require_jet(v, dimension_, order_);
  return value_(v, ctx);
}

Vector FunctionLagrangian::partial(int m, std::span<const Vector> v,
                                   const IntervalContext& ctx) const {
  require_jet(v, dimension_, order_);
  if (m < 0 || m > order_) throw InvalidInput("jet slot out of range");
  return partial_(m, v, ctx);
}

double FunctionLagrangian::time_partial(std::span<const Vector> v,
                                        const IntervalContext& ctx) const {
  require_jet(v, dimension_, order_);
  return time_partial_ ? time_partial_(v, ctx) : 0.0;
}

}  // namespace varistep
