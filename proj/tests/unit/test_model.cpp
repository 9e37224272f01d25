#include <doctest.h>

#include <cmath>

#include "varistep/error.hpp"
#include "varistep/model.hpp"

using namespace varistep;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

PhasePoint point(double q, double p, double t) { return {vec({q}), vec({p}), t}; }

}  // namespace

TEST_CASE("phase points pack momenta first") {
  const PhasePoint x{vec({1, 2}), vec({3, 4}), 0.5};
  CHECK(x.packed() == vec({3, 4, 1, 2}));
  const PhasePoint y = PhasePoint::unpack(x.packed(), 0.5);
  CHECK(y.q == x.q);
  CHECK(y.p == x.p);
}

TEST_CASE("builtin registry validates names and parameters") {
  CHECK(builtin_model_names() ==
        std::vector<std::string>{"free", "harmonic", "polynomial_potential", "perturbed_pendulum"});
  CHECK_THROWS_AS(builtin_model("nope"), ConfigError);
  CHECK_THROWS_AS(builtin_model("harmonic", {{"stiffness", 1.0}}), ConfigError);
  CHECK_THROWS_AS(builtin_model("harmonic", {{"mass", 0.0}}), ConfigError);
  CHECK_THROWS_AS(builtin_model("free", {{"dimension", 1.5}}), ConfigError);
  CHECK_THROWS_AS(builtin_model("polynomial_potential"), ConfigError);
}

TEST_CASE("perturbed pendulum matches its closed form") {
  const ModelPtr m = builtin_model("perturbed_pendulum");
  CHECK_FALSE(m->autonomous());
  const double q = 0.5;
  const double p = 0.5;
  const double t = 30.0;
  const double f = 1.0 - 0.1 * std::sin(0.02 * t);
  const HamiltonianEval h = m->evaluate(point(q, p, t));
  CHECK(h.value == doctest::Approx(0.5 * p * p + (1 - std::cos(q)) * f));
  CHECK(h.grad_p[0] == doctest::Approx(p));
  CHECK(h.grad_q[0] == doctest::Approx(std::sin(q) * f));
  CHECK(h.time == doctest::Approx(-(1 - std::cos(q)) * 0.1 * 0.02 * std::cos(0.02 * t)));

  const PotentialEval v = m->potential_bundle(q, t);
  CHECK(v.V2 == doctest::Approx(std::cos(q) * f));
  CHECK(v.V3 == doctest::Approx(-std::sin(q) * f));
  CHECK(v.V1t == doctest::Approx(-std::sin(q) * 0.1 * 0.02 * std::cos(0.02 * t)));

  CHECK(builtin_model("perturbed_pendulum", {{"a", 0.0}})->autonomous());
}

TEST_CASE("evaluate checks dimensions") {
  const ModelPtr m = builtin_model("harmonic", {{"dimension", 2}, {"k", 4}, {"mass", 2}});
  CHECK(m->dimension() == 2);
  CHECK(*m->inverse_mass() == 0.5);
  const PhasePoint x{vec({1, 2}), vec({2, 0}), 0.0};
  CHECK(m->energy(x) == doctest::Approx(0.25 * 4 + 2.0 * 5));
  CHECK_THROWS_AS(m->evaluate(point(1, 1, 0)), InvalidInput);
  CHECK_THROWS_AS(m->potential_bundle(1.0, 0.0), CapabilityError);
}

TEST_CASE("expression models agree with the builtin pendulum") {
  const ModelPtr e = expression_model("p^2/2 + (1 - cos(q))*(1 - 0.1*sin(0.02*t))", 1);
  const ModelPtr b = builtin_model("perturbed_pendulum");
  CHECK(e->name() == "hamiltonian_expr(0.5*p^2 + (1 - cos(q))*(1 - 0.1*sin(0.02*t)))");
  REQUIRE(e->inverse_mass().has_value());
  CHECK(*e->inverse_mass() == 1.0);
  CHECK_FALSE(e->autonomous());
  for (double q : {-2.0, 0.1, 1.3}) {
    for (double t : {0.0, 17.0, 400.0}) {
      const PhasePoint x = point(q, 0.4, t);
      const HamiltonianEval he = e->evaluate(x);
      const HamiltonianEval hb = b->evaluate(x);
      CHECK(he.value == doctest::Approx(hb.value).epsilon(1e-14));
      CHECK(he.grad_q[0] == doctest::Approx(hb.grad_q[0]).epsilon(1e-14));
      CHECK(he.time == doctest::Approx(hb.time).epsilon(1e-14));
      const PotentialEval ve = e->potential_bundle(q, t);
      const PotentialEval vb = b->potential_bundle(q, t);
      CHECK(ve.V3 == doctest::Approx(vb.V3).epsilon(1e-14));
      CHECK(ve.V2t == doctest::Approx(vb.V2t).epsilon(1e-14));
    }
  }
}

TEST_CASE("non-separable expressions decline potential bundles") {
  const ModelPtr m = expression_model("p^2*q^2/2 + q^2/2", 1);
  CHECK_FALSE(m->inverse_mass().has_value());
  CHECK(m->autonomous());
  CHECK_THROWS_AS(m->potential_bundle(0.1, 0.0), CapabilityError);
  CHECK_THROWS_AS(SeparableLagrangian{m}, CapabilityError);
  CHECK_FALSE(expression_model("p^2/2 + p + q^2", 1)->inverse_mass().has_value());
  CHECK_THROWS_AS(expression_model("p^2 + r", 1), NameError);
  CHECK_THROWS_AS(expression_model("p^2 +", 1), ParseError);
}

TEST_CASE("analytic derivatives agree with finite differences") {
  const std::vector<PhasePoint> pts{point(0.3, -0.2, 1.0), point(1.1, 0.7, 50.0),
                                    point(-0.8, 0.0, 200.0)};
  for (const std::string& name : builtin_model_names()) {
    CAPTURE(name);
    const ModelPtr m =
        name == "polynomial_potential"
            ? builtin_model(name, {{"c1", 0.3}, {"c2", 0.5}, {"c3", -0.2}, {"c4", 0.25}})
            : builtin_model(name);
    CHECK(check_derivatives(*m, pts).worst() < 1e-6);
  }
  const ModelPtr e = expression_model("p^2/2 + exp(-q^2)*cos(t)", 1);
  CHECK(check_derivatives(*e, pts).worst() < 1e-6);
}

TEST_CASE("Lagrangians derived from a separable model") {
  const ModelPtr m = builtin_model("harmonic", {{"k", 2.0}, {"mass", 4.0}});
  const std::vector<Vector> v{vec({0.5}), vec({0.25})};
  const IntervalContext ctx{0.0, 0.2};
  const SeparableLagrangian sep(m);
  CHECK(sep.value(v, ctx) == doctest::Approx(0.5 * 4 * 0.0625 - 0.5 * 2 * 0.25));
  CHECK(sep.partial(1, v, ctx)[0] == doctest::Approx(1.0));
  CHECK(sep.partial(0, v, ctx)[0] == doctest::Approx(-1.0));
  // Midpoint variant evaluates V at q + tau v / 2.
  const MidpointLagrangian mid(m);
  const double qm = 0.5 + 0.1 * 0.25;
  CHECK(mid.value(v, ctx) == doctest::Approx(0.125 - qm * qm));
  CHECK(mid.partial(1, v, ctx)[0] == doctest::Approx(1.0 - 0.1 * 2 * qm));
}
