#include <doctest.h>

#include <cmath>

#include "varistep/error.hpp"
#include "varistep/geometry.hpp"

using namespace varistep;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }
PhasePoint point(double q, double p, double t = 0.0) { return {scalar(q), scalar(p), t}; }

}  // namespace

TEST_CASE("symplectic matrix layout") {
  const Matrix w = symplectic_matrix(2);
  CHECK(w(0, 2) == 1.0);
  CHECK(w(1, 3) == 1.0);
  CHECK(w(2, 0) == -1.0);
  CHECK(w(0, 1) == 0.0);
}

TEST_CASE("residual of linear maps with known answers") {
  Matrix rot(2, 2);
  const double a = 0.7;
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  CHECK(symplecticity_residual(rot) < 1e-15);
  Matrix shear(2, 2);
  shear << 1.0, 5.0, 0.0, 1.0;
  CHECK(symplecticity_residual(shear) == 0.0);
  // J = 2I gives J^T Omega J - Omega = 3 Omega.
  CHECK(symplecticity_residual(2.0 * Matrix::Identity(4, 4)) == doctest::Approx(3.0));
  CHECK_THROWS_AS(symplecticity_residual(Matrix::Identity(3, 3)), InvalidInput);
  CHECK_THROWS_AS(symplecticity_residual(Matrix(2, 3)), InvalidInput);
}

TEST_CASE("finite-difference Jacobian of an affine map") {
  Matrix a(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  const PhaseMap map = [&](const Vector& x) { return Vector(a * x + Vector::Ones(2)); };
  CHECK((step_jacobian(map, Vector::Constant(2, 5.0)) - a).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fixed-step maps are symplectic") {
  const ModelPtr m = builtin_model("perturbed_pendulum", {{"a", 0.2}, {"omega", 1.0}});
  const Vector x = point(1.2, -0.4).packed();
  CHECK(symplecticity_residual(step_jacobian(fixed_midpoint_map(m, 2.0, 0.3, {}), x)) < 1e-8);
  for (double alpha : {0.0, 0.5, 1.0}) {
    const PhaseMap map = alpha_beta_map(m, SchemeParams::from_alpha(alpha), 2.0, 0.3, {});
    CHECK(symplecticity_residual(step_jacobian(map, x)) < 1e-8);
  }
}

TEST_CASE("variable-step map is measurably not symplectic on a nonlinear model") {
  const ModelPtr m = builtin_model("perturbed_pendulum", {{"a", 0.0}});
  const PhaseMap map = variable_step_map(m, 0.0, 0.1, 2, {});
  CHECK(symplecticity_residual(step_jacobian(map, point(0.5, 0.5).packed())) > 1e-6);
}

TEST_CASE("omega_D is conserved by the fixed-step midpoint rule") {
  const ModelPtr m = builtin_model("harmonic");
  const Vector u = Vector::Unit(2, 0);
  const Vector v = Vector::Unit(2, 1);
  const SymplecticReport r = omega_sequence(m, point(1.0, 0.0), 0.1, 100, u, v,
                                            SchemeChoice{SchemeKind::FixedStepMidpoint}, {});
  REQUIRE(r.omega.size() == 101);
  CHECK(r.omega.front() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.relative_deviation <= 1e-5);
  CHECK_THROWS_AS(omega_sequence(m, point(1.0, 0.0), 0.1, 10, u, 2.0 * u,
                                 SchemeChoice{SchemeKind::FixedStepMidpoint}, {}),
                  InvalidInput);
  CHECK_THROWS_AS(omega_sequence(m, point(1.0, 0.0), 0.1, 10, Vector::Unit(3, 0), v,
                                 SchemeChoice{SchemeKind::FixedStepMidpoint}, {}),
                  InvalidInput);
}
