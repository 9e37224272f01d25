#include <array>
#include <cmath>
#include <optional>

#include "varistep/error.hpp"
#include "varistep/model.hpp"

namespace varistep {
namespace {

class ParamReader {
 public:
  ParamReader(std::string_view model, const ParamMap& params) : model_(model), params_(params) {}

  double get(std::string_view key, double fallback) {
    seen_.emplace_back(key);
    const auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  std::optional<double> find(std::string_view key) {
    seen_.emplace_back(key);
    const auto it = params_.find(key);
    if (it == params_.end()) return std::nullopt;
    return it->second;
  }

  int get_dimension() {
    const double d = get("dimension", 1.0);
    if (d < 1.0 || d != std::floor(d) || d > 1e6) {
      throw ConfigError(std::string(model_) + ": dimension must be a positive integer");
    }
    return static_cast<int>(d);
  }

  double inverse_mass() {
    const double m = get("mass", 1.0);
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ConfigError(std::string(model_) + ": mass must be positive");
    }
    return 1.0 / m;
  }

  // Any key that no getter asked for is a typo or belongs to another model.
  void finish() const {
    for (const auto& [key, value] : params_) {
      bool known = false;
      for (const auto& s : seen_) known = known || s == key;
      if (!known) throw ConfigError(std::string(model_) + ": unknown parameter '" + key + "'");
    }
  }

 private:
  std::string_view model_;
  const ParamMap& params_;
  std::vector<std::string> seen_;
};

// V = k|q|^2/2 (k = 0 gives the free particle).
class QuadraticModel final : public SeparableHamiltonian {
 public:
  QuadraticModel(std::string name, int dimension, double inverse_mass, double k)
      : SeparableHamiltonian(dimension, inverse_mass), name_(std::move(name)), k_(k) {}

  std::string name() const override { return name_; }
  bool autonomous() const override { return true; }
  unsigned potential_capabilities() const override {
    return dimension() == 1 ? potential::all : 0u;
  }

  double potential_value(const Vector& q, double) const override {
    return 0.5 * k_ * q.squaredNorm();
  }
  Vector potential_gradient(const Vector& q, double) const override { return k_ * q; }
  double potential_time_derivative(const Vector&, double) const override { return 0.0; }

 protected:
  PotentialEval do_potential(double q, double, unsigned) const override {
    return {0.5 * k_ * q * q, k_ * q, k_, 0.0, 0.0, 0.0, 0.0};
  }

 private:
  std::string name_;
  double k_;
};

// V = sum_i c_i q^i, i = 0..8.
class PolynomialModel final : public SeparableHamiltonian {
 public:
  PolynomialModel(std::array<double, 9> c, double inverse_mass)
      : SeparableHamiltonian(1, inverse_mass), c_(c) {}

  std::string name() const override { return "polynomial_potential"; }
  bool autonomous() const override { return true; }
  unsigned potential_capabilities() const override { return potential::all; }

  double potential_value(const Vector& q, double) const override { return derivative(q[0], 0); }
  Vector potential_gradient(const Vector& q, double) const override {
    return Vector::Constant(1, derivative(q[0], 1));
  }
  double potential_time_derivative(const Vector&, double) const override { return 0.0; }

 protected:
  PotentialEval do_potential(double q, double, unsigned) const override {
    return {derivative(q, 0), derivative(q, 1), derivative(q, 2), derivative(q, 3), 0.0, 0.0, 0.0};
  }

 private:
  // d^m/dq^m of the polynomial by Horner's rule on the differentiated
  // coefficients.
  double derivative(double q, int m) const {
    double acc = 0.0;
    for (int i = 8; i >= m; --i) {
      double falling = 1.0;
      for (int j = 0; j < m; ++j) falling *= i - j;
      acc = acc * q + falling * c_[i];
    }
    return acc;
  }

  std::array<double, 9> c_;
};

// H = l^2/(2 Mr^2) + Mgr (1 - cos theta)(1 - a sin(omega t)).
class PerturbedPendulum final : public SeparableHamiltonian {
 public:
  PerturbedPendulum(double inertia, double mgr, double a, double omega)
      : SeparableHamiltonian(1, 1.0 / inertia), mgr_(mgr), a_(a), omega_(omega) {}

  std::string name() const override { return "perturbed_pendulum"; }
  bool autonomous() const override { return a_ == 0.0 || omega_ == 0.0; }
  unsigned potential_capabilities() const override { return potential::all; }

  double potential_value(const Vector& q, double t) const override {
    return mgr_ * (1.0 - std::cos(q[0])) * f(t);
  }
  Vector potential_gradient(const Vector& q, double t) const override {
    return Vector::Constant(1, mgr_ * std::sin(q[0]) * f(t));
  }
  double potential_time_derivative(const Vector& q, double t) const override {
    return mgr_ * (1.0 - std::cos(q[0])) * df(t);
  }

 protected:
  PotentialEval do_potential(double q, double t, unsigned) const override {
    const double s = std::sin(q);
    const double c = std::cos(q);
    return {mgr_ * (1.0 - c) * f(t), mgr_ * s * f(t),  mgr_ * c * f(t),          -mgr_ * s * f(t),
            mgr_ * s * df(t),        mgr_ * c * df(t), mgr_ * (1.0 - c) * df(t)};
  }

 private:
  double f(double t) const { return 1.0 - a_ * std::sin(omega_ * t); }
  double df(double t) const { return -a_ * omega_ * std::cos(omega_ * t); }

  double mgr_;
  double a_;
  double omega_;
};

}  // namespace

std::vector<std::string> builtin_model_names() {
  return {"free", "harmonic", "polynomial_potential", "perturbed_pendulum"};
}

ModelPtr builtin_model(std::string_view name, const ParamMap& params) {
  ParamReader r(name, params);
  ModelPtr model;
  if (name == "free") {
    const int n = r.get_dimension();
    model = std::make_shared<QuadraticModel>("free", n, r.inverse_mass(), 0.0);
  } else if (name == "harmonic") {
    const int n = r.get_dimension();
    const double c = r.inverse_mass();
    model = std::make_shared<QuadraticModel>("harmonic", n, c, r.get("k", 1.0));
  } else if (name == "polynomial_potential") {
    std::array<double, 9> c{};
    bool any = false;
    for (int i = 0; i < 9; ++i) {
      if (const auto v = r.find("c" + std::to_string(i))) {
        c[i] = *v;
        any = true;
      }
    }
    if (!any) throw ConfigError("polynomial_potential: at least one coefficient c0..c8 required");
    model = std::make_shared<PolynomialModel>(c, r.inverse_mass());
  } else if (name == "perturbed_pendulum") {
    const double inertia = r.get("inertia", 1.0);
    if (!(inertia > 0.0)) throw ConfigError("perturbed_pendulum: inertia must be positive");
    model = std::make_shared<PerturbedPendulum>(inertia, r.get("mgr", 1.0), r.get("a", 0.1),
                                                r.get("omega", 0.02));
  } else {
    throw ConfigError("unknown builtin model '" + std::string(name) + "'");
  }
  r.finish();
  for (const auto& [key, value] : params) {
    if (!std::isfinite(value)) throw ConfigError(std::string(name) + ": " + key + " is not finite");
  }
  return model;
}

}  // namespace varistep
