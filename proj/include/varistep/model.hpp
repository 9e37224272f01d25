#pragma once

// Hamiltonian and Lagrangian evaluation interfaces.
//
// Phase vectors are packed as (p, q) wherever a flat vector is needed, so the
// canonical symplectic matrix is [[0, I], [-I, 0]].

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varistep/grid.hpp"

namespace varistep {

struct PhasePoint {
  Vector q;
  Vector p;
  double t = 0.0;

  int dimension() const noexcept { return static_cast<int>(q.size()); }

  /// Flat (p, q) vector of length 2n.
  Vector packed() const;
  static PhasePoint unpack(const Vector& pq, double t);
};

/// Bits selecting which parts of a Hamiltonian evaluation are wanted.
namespace partial {
inline constexpr unsigned value = 1u << 0;
inline constexpr unsigned grad_p = 1u << 1;
inline constexpr unsigned grad_q = 1u << 2;
inline constexpr unsigned time = 1u << 3;
inline constexpr unsigned all = value | grad_p | grad_q | time;
}  // namespace partial

/// Fields that were not requested are left empty (vectors) or NaN (scalars).
struct HamiltonianEval {
  double value;
  Vector grad_p;
  Vector grad_q;
  double time;
};

/// Bits selecting entries of the one-dimensional potential bundle.
namespace potential {
inline constexpr unsigned V = 1u << 0;
inline constexpr unsigned V1 = 1u << 1;   // dV/dq
inline constexpr unsigned V2 = 1u << 2;   // d2V/dq2
inline constexpr unsigned V3 = 1u << 3;   // d3V/dq3
inline constexpr unsigned V1t = 1u << 4;  // d2V/dq dt
inline constexpr unsigned V2t = 1u << 5;  // d3V/dq2 dt
inline constexpr unsigned Vt = 1u << 6;   // dV/dt
inline constexpr unsigned all = V | V1 | V2 | V3 | V1t | V2t | Vt;
}  // namespace potential

struct PotentialEval {
  double V;
  double V1;
  double V2;
  double V3;
  double V1t;
  double V2t;
  double Vt;
};

/// H(p, q; t) with first partials. Separable models H = c|p|^2/2 + V(q, t)
/// additionally report c and, for one degree of freedom, a potential bundle
/// with derivatives up to third order.
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  virtual int dimension() const = 0;
  virtual std::string name() const = 0;
  /// True when dH/dt vanishes identically.
  virtual bool autonomous() const = 0;

  /// Throws InvalidInput on a dimension mismatch.
  HamiltonianEval evaluate(const PhasePoint& x, unsigned request = partial::all) const;
  double energy(const PhasePoint& x) const { return evaluate(x, partial::value).value; }

  /// c in H = c|p|^2/2 + V(q, t), or nullopt for non-separable models.
  virtual std::optional<double> inverse_mass() const { return std::nullopt; }
  /// Bundle entries this model can supply (zero when none).
  virtual unsigned potential_capabilities() const { return 0; }
  /// Throws CapabilityError when `request` asks for entries outside
  /// potential_capabilities().
  PotentialEval potential_bundle(double q, double t, unsigned request = potential::all) const;

 protected:
  virtual HamiltonianEval do_evaluate(const PhasePoint& x, unsigned request) const = 0;
  virtual PotentialEval do_potential(double q, double t, unsigned request) const;
};

using ModelPtr = std::shared_ptr<const HamiltonianModel>;

/// Base for H = c|p|^2/2 + V(q, t) given V and its first partials.
class SeparableHamiltonian : public HamiltonianModel {
 public:
  SeparableHamiltonian(int dimension, double inverse_mass);

  int dimension() const override { return dimension_; }
  std::optional<double> inverse_mass() const override { return inverse_mass_; }

  virtual double potential_value(const Vector& q, double t) const = 0;
  virtual Vector potential_gradient(const Vector& q, double t) const = 0;
  virtual double potential_time_derivative(const Vector& q, double t) const = 0;

 protected:
  HamiltonianEval do_evaluate(const PhasePoint& x, unsigned request) const override;

 private:
  int dimension_;
  double inverse_mass_;
};

using ParamMap = std::map<std::string, double, std::less<>>;

/// Builtin analytic models: free, harmonic, polynomial_potential,
/// perturbed_pendulum. Unknown names, unknown parameter keys and missing
/// required parameters raise ConfigError.
ModelPtr builtin_model(std::string_view name, const ParamMap& params = {});
std::vector<std::string> builtin_model_names();

/// Hamiltonian from potential_dsl source over the canonical variables of
/// `dimension` degrees of freedom (q, p, t or q_i, p_i, t). Separability is
/// detected symbolically.
ModelPtr expression_model(std::string_view source, int dimension);

/// Largest relative disagreement between each analytic partial and a
/// fourth-order central difference of the quantity one level below.
struct DerivativeCheck {
  double grad_p = 0.0;
  double grad_q = 0.0;
  double time = 0.0;
  double bundle = 0.0;  // worst entry of the potential bundle, 0 if absent
  double worst() const;
};

/// Relative error is |analytic - fd| / max(1, |fd|).
DerivativeCheck check_derivatives(const HamiltonianModel& model,
                                  std::span<const PhasePoint> points);

// ---------------------------------------------------------------------------
// Lagrangians

/// Per-interval data a discrete Lagrangian may depend on besides the jet:
/// the left node time t_k and the step length tau_k.
struct IntervalContext {
  double t = 0.0;
  double tau = 0.0;
};

/// L(v_0, ..., v_l; context) with partials in each jet slot.
class LagrangianModel {
 public:
  virtual ~LagrangianModel() = default;

  virtual int dimension() const = 0;
  virtual int order() const = 0;

  /// `v` holds v_0..v_l.
  virtual double value(std::span<const Vector> v, const IntervalContext& ctx) const = 0;
  /// dL/dv_m, 0 <= m <= order().
  virtual Vector partial(int m, std::span<const Vector> v, const IntervalContext& ctx) const = 0;
  /// Explicit time derivative.
  virtual double time_partial(std::span<const Vector> v, const IntervalContext& ctx) const = 0;
};

/// L = |v|^2/(2c) - V(q, t_k + w*tau_k) built from a separable Hamiltonian.
/// The time weight w places the potential's time argument inside the step.
class SeparableLagrangian : public LagrangianModel {
 public:
  explicit SeparableLagrangian(ModelPtr model, double time_weight = 0.0);

  int dimension() const override;
  int order() const override { return 1; }
  double value(std::span<const Vector> v, const IntervalContext& ctx) const override;
  Vector partial(int m, std::span<const Vector> v, const IntervalContext& ctx) const override;
  double time_partial(std::span<const Vector> v, const IntervalContext& ctx) const override;

 private:
  ModelPtr model_;
  double c_;
  double time_weight_;
};

/// L = |v|^2/(2c) - V(q + tau*v/2, t_k + tau/2). Sequences produced by the
/// implicit midpoint rule satisfy its first-order Euler-Lagrange equation
/// exactly, on any grid.
class MidpointLagrangian : public LagrangianModel {
 public:
  explicit MidpointLagrangian(ModelPtr model);

  int dimension() const override;
  int order() const override { return 1; }
  double value(std::span<const Vector> v, const IntervalContext& ctx) const override;
  Vector partial(int m, std::span<const Vector> v, const IntervalContext& ctx) const override;
  double time_partial(std::span<const Vector> v, const IntervalContext& ctx) const override;

 private:
  ModelPtr model_;
  double c_;
};

/// Lagrangian assembled from callbacks; used for higher-order toys.
class FunctionLagrangian : public LagrangianModel {
 public:
  using ValueFn = std::function<double(std::span<const Vector>, const IntervalContext&)>;
  using PartialFn =
      std::function<Vector(int, std::span<const Vector>, const IntervalContext&)>;

  /// A missing time callback means L has no explicit time dependence.
  FunctionLagrangian(int dimension, int order, ValueFn value, PartialFn partial,
                     ValueFn time_partial = {});

  int dimension() const override { return dimension_; }
  int order() const override { return order_; }
  double value(std::span<const Vector> v, const IntervalContext& ctx) const override;
  Vector partial(int m, std::span<const Vector> v, const IntervalContext& ctx) const override;
  double time_partial(std::span<const Vector> v, const IntervalContext& ctx) const override;

 private:
  int dimension_;
  int order_;
  ValueFn value_;
  PartialFn partial_;
  ValueFn time_partial_;
};

}  // namespace varistep
