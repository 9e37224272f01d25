// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here; the process exits non-zero when any criterion fails.

#include <CLI11.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "varistep/config.hpp"
#include "varistep/csv.hpp"
#include "varistep/el_residual.hpp"
#include "varistep/error.hpp"
#include "varistep/expr.hpp"
#include "varistep/geometry.hpp"
#include "varistep/grid.hpp"
#include "varistep/model.hpp"
#include "varistep/runner.hpp"
#include "varistep/scheme_family.hpp"
#include "varistep/site_density.hpp"
#include "varistep/stepper.hpp"

using namespace varistep;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector scalar(double x) { return Vector::Constant(1, x); }
PhasePoint point(double q, double p, double t = 0.0) { return {scalar(q), scalar(p), t}; }

constexpr double kEps = std::numeric_limits<double>::epsilon();

fs::path g_out_dir = "acceptance_out";

// ---------------------------------------------------------------------------
// 1. Autonomous energy conservation

Outcome autonomous_energy() {
  const RunConfig cfg = parse_config(preset_config("pendulum-autonomous"));
  const ModelPtr model = make_model(cfg.model);
  const auto start = Clock::now();
  const IntegrationResult r =
      integrate_scheme(model, cfg.scheme, cfg.initial, cfg.tau1, cfg.stop, cfg.stepper);
  const double secs = seconds_since(start);
  if (!r.ok()) return {false, "integration failed: " + r.failure->message};
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const StepState& s : r.trajectory.steps) {
    lo = std::min(lo, s.e_mid);
    hi = std::max(hi, s.e_mid);
  }
  const double spread = (hi - lo) / std::max(std::abs(lo), std::abs(hi));
  return {spread <= 1e-9 && secs < 10.0 && r.trajectory.steps.size() == 10000,
          std::to_string(r.trajectory.steps.size()) + " steps, relative spread " + fmt(spread) +
              " (<= 1e-9), " + fmt(secs) + " s (< 10 s)"};
}

// ---------------------------------------------------------------------------
// 2, 3. The long forced-pendulum run, produced through the runner and read
// back from its CSV.

std::optional<Trajectory> g_sec5;
double g_sec5_seconds = 0.0;

const Trajectory& sec5_trajectory() {
  if (!g_sec5) {
    const RunConfig cfg = parse_config(preset_config("paper-sec5"));
    fs::create_directories(g_out_dir);
    const std::string path = (g_out_dir / "paper-sec5.csv").string();
    const auto start = Clock::now();
    const RunOutcome out = run_integrate(cfg, path);
    g_sec5_seconds = seconds_since(start);
    if (out.failure) throw std::runtime_error("paper-sec5 run failed: " + out.report);
    std::ifstream in(path);
    g_sec5 = read_trajectory_csv(in);
  }
  return *g_sec5;
}

// Dominant period of tau_k: linear resampling onto a 0.25 s grid, mean
// removal, Hann window, zero-padded FFT periodogram.
double dominant_period(const Trajectory& tr) {
  std::vector<double> ts;
  std::vector<double> taus;
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    ts.push_back(tr.t[k] + 0.5 * tr.steps[k].tau);
    taus.push_back(tr.steps[k].tau);
  }
  const double dt = 0.25;
  std::vector<double> series;
  std::size_t j = 0;
  for (double t = ts.front(); t <= ts.back(); t += dt) {
    while (j + 2 < ts.size() && ts[j + 1] < t) ++j;
    const double w = (t - ts[j]) / (ts[j + 1] - ts[j]);
    series.push_back((1.0 - w) * taus[j] + w * taus[j + 1]);
  }
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(series.size());
  const std::size_t n = series.size();
  std::size_t padded = 1;
  while (padded < 8 * n) padded <<= 1;
  std::vector<double> input(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / (n - 1));
    input[i] = (series[i] - mean) * hann;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, input);
  std::size_t best = 1;
  for (std::size_t i = 1; i <= padded / 2; ++i) {
    if (std::norm(spectrum[i]) > std::norm(spectrum[best])) best = i;
  }
  return static_cast<double>(padded) * dt / static_cast<double>(best);
}

Outcome long_period() {
  const Trajectory& tr = sec5_trajectory();
  const double expected = 2.0 * M_PI / 0.02;
  const double period = dominant_period(tr);
  const double rel = std::abs(period - expected) / expected;
  return {rel <= 0.05 && g_sec5_seconds < 60.0 && tr.t.back() >= 10000.0,
          std::to_string(tr.size()) + " nodes to t=" + fmt(tr.t.back()) + ", dominant period " +
              fmt(period) + " s vs " + fmt(expected) + " s (rel " + fmt(rel) + " <= 0.05), " +
              fmt(g_sec5_seconds) + " s (< 60 s)"};
}

Outcome phase_alignment() {
  const Trajectory& tr = sec5_trajectory();
  std::size_t intervals = 0;
  while (intervals < tr.steps.size() && tr.t[intervals] <= 16.0) ++intervals;
  auto tau = [&](std::size_t k) { return tr.steps[k].tau; };
  auto theta = [&](std::size_t k) { return tr.q[k][0]; };

  std::vector<std::size_t> sign_changes;  // j with theta_j * theta_(j+1) <= 0
  std::vector<std::size_t> extrema;       // interior strict extrema of theta
  for (std::size_t j = 0; j + 1 < tr.size() && j <= intervals + 1; ++j) {
    if (theta(j) * theta(j + 1) <= 0.0) sign_changes.push_back(j);
    if (j > 0) {
      const double a = theta(j) - theta(j - 1);
      const double b = theta(j + 1) - theta(j);
      if (a * b < 0.0) extrema.push_back(j);
    }
  }
  std::size_t minima = 0;
  std::size_t maxima = 0;
  std::size_t misaligned = 0;
  for (std::size_t k = 1; k + 1 < intervals; ++k) {
    const bool is_min = tau(k) < tau(k - 1) && tau(k) < tau(k + 1);
    const bool is_max = tau(k) > tau(k - 1) && tau(k) > tau(k + 1);
    if (is_min) {
      ++minima;
      const bool near = std::any_of(sign_changes.begin(), sign_changes.end(), [&](std::size_t j) {
        const long d = static_cast<long>(k) - static_cast<long>(j);
        return std::min(std::labs(d), std::labs(d - 1)) <= 1;
      });
      if (!near) ++misaligned;
    }
    if (is_max) {
      ++maxima;
      const bool near = std::any_of(extrema.begin(), extrema.end(), [&](std::size_t j) {
        return std::labs(static_cast<long>(k) - static_cast<long>(j)) <= 1;
      });
      if (!near) ++misaligned;
    }
  }
  return {misaligned == 0 && minima > 0 && maxima > 0,
          std::to_string(intervals) + " steps on [0, 16] s: " + std::to_string(minima) +
              " tau minima, " + std::to_string(maxima) + " tau maxima, " +
              std::to_string(misaligned) + " misaligned"};
}

// ---------------------------------------------------------------------------
// 4. Fixed-step symplecticity of the classical alpha/beta instances

const std::array<SchemeParams, 3> kClassical{SchemeParams(1.0, 0.0), SchemeParams(0.0, 1.0),
                                             SchemeParams(0.5, 0.5)};

std::vector<ModelPtr> test_models() {
  return {builtin_model("harmonic", {{"k", 1.0}}),
          builtin_model("polynomial_potential", {{"c2", 0.5}, {"c4", 0.25}, {"mass", 2.0}}),
          builtin_model("perturbed_pendulum", {{"a", 0.1}, {"omega", 0.5}})};
}

Outcome fixed_step_symplecticity() {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> state(-1.0, 1.0);
  std::uniform_real_distribution<double> time(0.0, 10.0);
  double worst = 0.0;
  std::size_t samples = 0;
  for (const ModelPtr& m : test_models()) {
    for (const SchemeParams& s : kClassical) {
      for (int i = 0; i < 50; ++i) {
        const double q = state(rng);
        const double p = state(rng);
        const PhaseMap f = alpha_beta_map(m, s, time(rng), 0.1, SolveSettings{});
        Vector x(2);
        x << p, q;
        worst = std::max(worst, symplecticity_residual(step_jacobian(f, x)));
        ++samples;
      }
    }
  }
  return {worst <= 1e-6, std::to_string(samples) + " (scheme, model, state) samples, max ||J^T W J - W|| " +
                             fmt(worst) + " (<= 1e-6)"};
}

// ---------------------------------------------------------------------------
// 5. Conservation of the discrete symplectic form

Outcome omega_conservation() {
  const ModelPtr harmonic = builtin_model("harmonic", {{"k", 1.0}});
  Vector u(2);
  Vector v(2);
  u << 1.0, 0.0;
  v << 0.0, 1.0;
  const SchemeChoice fixed{SchemeKind::FixedStepMidpoint};
  const SymplecticReport r =
      omega_sequence(harmonic, point(1.0, 0.0), 0.1, 100, u, v, fixed, StepperSettings{});

  // Informational: the variable-step map on the forced pendulum, next to a
  // fixed-step control run that shows the finite-difference noise floor.
  const RunConfig sec5 = parse_config(preset_config("paper-sec5"));
  const ModelPtr pendulum = make_model(sec5.model);
  std::string info;
  try {
    const SymplecticReport var = omega_sequence(pendulum, sec5.initial, sec5.tau1, 200, u, v,
                                                SchemeChoice{}, StepperSettings{});
    const SymplecticReport ctl =
        omega_sequence(pendulum, sec5.initial, sec5.tau1, 200, u, v, fixed, StepperSettings{});
    info = "; variable-step forced pendulum, 200 steps: relative drift " +
           fmt(var.relative_deviation) + " (informational; fixed-step control " +
           fmt(ctl.relative_deviation) + ")";
  } catch (const Error& e) {
    info = std::string("; variable-step drift not measured: ") + e.what();
  }
  return {r.relative_deviation <= 1e-5,
          "fixed-step harmonic, 100 steps: max relative deviation " + fmt(r.relative_deviation) +
              " (<= 1e-5)" + info};
}

// ---------------------------------------------------------------------------
// 6. Equivalence with direct implementations of the classical schemes

struct Direct {
  double c;
  std::function<double(double, double)> force;  // -dV/dq at (q, t)
};

std::pair<double, double> direct_step(const Direct& d, const SchemeParams& s, double q, double p,
                                      double t, double tau) {
  if (s.alpha() == 1.0) {
    const double p1 = p + tau * d.force(q, t);
    return {q + tau * d.c * p1, p1};
  }
  if (s.alpha() == 0.0) {
    const double q1 = q + tau * d.c * p;
    return {q1, p + tau * d.force(q1, t)};
  }
  double q1 = q + tau * d.c * p;
  double p1 = p;
  for (int i = 0; i < 200; ++i) {
    const double p_next = p + tau * d.force(0.5 * (q + q1), t);
    const double q_next = q + tau * d.c * 0.5 * (p + p_next);
    const bool done = q_next == q1 && p_next == p1;
    q1 = q_next;
    p1 = p_next;
    if (done) break;
  }
  return {q1, p1};
}

Outcome scheme_oracles() {
  const std::vector<std::pair<ModelPtr, Direct>> cases{
      {builtin_model("polynomial_potential", {{"c2", 0.5}, {"c4", 0.25}, {"mass", 2.0}}),
       {0.5, [](double q, double) { return -(q + q * q * q); }}},
      {builtin_model("perturbed_pendulum", {{"a", 0.1}, {"omega", 0.5}}),
       {1.0, [](double q, double t) { return -std::sin(q) * (1.0 - 0.1 * std::sin(0.5 * t)); }}}};
  const double tau = 0.05;
  double worst_step = 0.0;
  double worst_traj = 0.0;
  for (const auto& [model, direct] : cases) {
    for (const SchemeParams& s : kClassical) {
      const IntegrationResult r =
          integrate_alpha_beta(model, s, point(0.7, 0.4), tau, {std::nullopt, 1000});
      if (!r.ok()) return {false, "integration failed: " + r.failure->message};
      const Trajectory& tr = r.trajectory;
      double q = 0.7;
      double p = 0.4;
      for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
        const auto [q1, p1] = direct_step(direct, s, tr.q[k][0], tr.p[k][0], tr.t[k], tau);
        worst_step = std::max({worst_step, std::abs(q1 - tr.q[k + 1][0]), std::abs(p1 - tr.p[k + 1][0])});
        std::tie(q, p) = direct_step(direct, s, q, p, static_cast<double>(k) * tau, tau);
        worst_traj = std::max({worst_traj, std::abs(q - tr.q[k + 1][0]), std::abs(p - tr.p[k + 1][0])});
      }
    }
  }
  return {worst_step <= 1e-10 && worst_traj <= 1e-10,
          "3 schemes x 2 models x 1000 steps: max per-step difference " + fmt(worst_step) +
              ", max trajectory difference " + fmt(worst_traj) + " (<= 1e-10)"};
}

// ---------------------------------------------------------------------------
// 7. Site density

struct QuadratureOrbit {
  std::vector<double> t;
  std::vector<PhasePoint> states;
  std::vector<double> integral;  // of V'''p^3 / (3 (V''p^2 + V'^2)) from 0 to t
};

// Quartic V = q^2/2 + q^4/4, unit mass; RK4 on (q, p, I).
QuadratureOrbit quartic_reference(double q0, double p0, double t_end, double h, double sample_every) {
  auto rhs = [](const std::array<double, 3>& y) {
    const double q = y[0];
    const double p = y[1];
    const double v1 = q + q * q * q;
    const double v2 = 1.0 + 3.0 * q * q;
    const double v3 = 6.0 * q;
    return std::array<double, 3>{p, -v1, v3 * p * p * p / (3.0 * (v2 * p * p + v1 * v1))};
  };
  QuadratureOrbit orbit;
  std::array<double, 3> y{q0, p0, 0.0};
  const auto steps = static_cast<long>(std::llround(t_end / h));
  const auto every = static_cast<long>(std::llround(sample_every / h));
  for (long i = 0; i <= steps; ++i) {
    if (i % every == 0) {
      orbit.t.push_back(static_cast<double>(i) * h);
      orbit.states.push_back(point(y[0], y[1], static_cast<double>(i) * h));
      orbit.integral.push_back(y[2]);
    }
    const auto k1 = rhs(y);
    std::array<double, 3> tmp;
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    const auto k2 = rhs(tmp);
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    const auto k3 = rhs(tmp);
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + h * k3[j];
    const auto k4 = rhs(tmp);
    for (int j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return orbit;
}

Outcome site_density() {
  // (a) quadratic potentials
  bool constant = true;
  std::size_t harmonic_steps = 0;
  std::size_t harmonic_degenerate = 0;
  const std::vector<std::tuple<double, double, double, double, double>> runs{
      {1.0, 1.0, 1.0, 0.0, 0.1}, {2.5, 0.7, 0.3, 1.2, 0.05}, {0.2, 3.0, -2.0, 0.5, 0.3}};
  for (const auto& [k, mass, q0, p0, tau1] : runs) {
    const ModelPtr m = builtin_model("harmonic", {{"k", k}, {"mass", mass}});
    const IntegrationResult r = integrate_trajectory(*m, point(q0, p0), tau1, {std::nullopt, 2000});
    if (!r.ok()) return {false, "harmonic run failed: " + r.failure->message};
    for (const StepState& s : r.trajectory.steps) {
      constant = constant && s.tau == tau1;
      ++harmonic_steps;
      if (s.flags & step_flag::degenerate) ++harmonic_degenerate;
    }
  }
  const IntegrationResult fr =
      integrate_trajectory(*builtin_model("free"), point(0.0, 1.5), 0.2, {std::nullopt, 500});
  if (!fr.ok()) return {false, "free run failed: " + fr.failure->message};
  std::size_t free_degenerate = 0;
  for (const StepState& s : fr.trajectory.steps) {
    constant = constant && s.tau == 0.2;
    if (s.flags & step_flag::degenerate) ++free_degenerate;
  }

  // (b) halving study on the autonomous quartic
  const ModelPtr quartic = builtin_model("polynomial_potential", {{"c2", 0.5}, {"c4", 0.25}});
  const double taus[] = {0.05, 0.025, 0.0125};
  const HalvingStudy study = halving_study(*quartic, point(0.5, 1.0), taus, 2.5);

  // (c) closed-form density ratio against quadrature along a reference orbit
  const QuadratureOrbit orbit = quartic_reference(0.5, 1.0, 6.0, 1e-4, 0.5);
  double worst = 0.0;
  for (std::size_t i = 1; i < orbit.states.size(); ++i) {
    const double closed = density_ratio(*quartic, orbit.states[i], orbit.states[0]);
    worst = std::max(worst, std::abs(closed - orbit.integral[i]));
  }

  const bool pass = constant && study.fitted_exponent >= 1.8 && worst <= 1e-4;
  return {pass, std::string("(a) tau ") + (constant ? "exactly constant" : "NOT constant") +
                    " on 3 harmonic runs (" + std::to_string(harmonic_steps) + " steps, " +
                    std::to_string(harmonic_degenerate) +
                    " degenerate-flagged: the energy equation's root is tau_k itself) and on free motion (" +
                    std::to_string(free_degenerate) + "/" + std::to_string(fr.trajectory.steps.size()) +
                    " degenerate-flagged); (b) halving exponent " + fmt(study.fitted_exponent) +
                    " (>= 1.8); (c) density ratio vs quadrature max diff " + fmt(worst) + " (<= 1e-4)"};
}

// ---------------------------------------------------------------------------
// 8. Higher-order Euler-Lagrange residuals

FunctionLagrangian second_order_toy() {
  return FunctionLagrangian(
      1, 2,
      [](std::span<const Vector> v, const IntervalContext&) {
        return 0.5 * v[2].squaredNorm() - 0.5 * v[0].squaredNorm();
      },
      [](int m, std::span<const Vector> v, const IntervalContext&) -> Vector {
        if (m == 0) return -v[0];
        if (m == 2) return v[2];
        return Vector::Zero(1);
      });
}

Outcome higher_order_el() {
  // (i) midpoint Lagrangian on variable-step trajectories
  double worst_l1 = 0.0;
  for (const ModelPtr& m : test_models()) {
    const IntegrationResult r = integrate_trajectory(*m, point(0.8, 0.3), 0.1, {std::nullopt, 500});
    if (!r.ok()) return {false, "integration failed: " + r.failure->message};
    worst_l1 = std::max(worst_l1, higher_order_el_residual(MidpointLagrangian(m),
                                                           jet_lift(r.trajectory.q_function(), 1))
                                      .max_el);
  }

  // (ii) l = 1 against the alpha = 1 three-point residual on random data
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> step(0.01, 0.3);
  std::uniform_real_distribution<double> value(-1.5, 1.5);
  double worst_match = 0.0;
  for (const ModelPtr& m : test_models()) {
    const auto lagrangian = scheme_lagrangian(m);
    for (int g = 0; g < 50; ++g) {
      std::vector<double> t{value(rng)};
      std::vector<double> q{value(rng)};
      for (int k = 1; k < 20; ++k) {
        t.push_back(t.back() + step(rng));
        q.push_back(value(rng));
      }
      const GridFunction qf = GridFunction::scalar(std::make_shared<const Grid>(t), q);
      const ElResidualReport el = higher_order_el_residual(*lagrangian, jet_lift(qf, 1));
      const GridFunction ab = alpha_beta_el_residual(*lagrangian, SchemeParams(1.0, 0.0), qf);
      for (std::size_t k = el.el.first(); k < el.el.last(); ++k) {
        worst_match = std::max(worst_match,
                               std::abs(el.el[k][0] - ab[k][0]) / (1.0 + std::abs(ab[k][0])));
      }
    }
  }

  // (iii) l = 2 toy: exact rational values on a non-uniform grid, and the
  // centred fourth difference on random uniform grids.
  const std::vector<double> t{0.0, 0.3, 0.5, 1.0, 1.2, 1.7, 2.0};
  std::vector<double> q;
  for (double x : t) q.push_back(x * x * x - 2 * x);
  const ElResidualReport toy = higher_order_el_residual(
      second_order_toy(), jet_lift(GridFunction::scalar(std::make_shared<const Grid>(t), q), 2));
  const double rational[] = {-58.87166666666667, 272.95, -121.268};
  double worst_toy = 0.0;
  for (std::size_t k = 2; k < 5; ++k) {
    worst_toy = std::max(worst_toy, std::abs(toy.el[k][0] - rational[k - 2]) / std::abs(rational[k - 2]));
  }
  for (int g = 0; g < 100; ++g) {
    const double h = step(rng);
    const std::size_t n = 12;
    auto grid = std::make_shared<const Grid>(Grid::uniform(value(rng), h, n));
    std::vector<double> y;
    for (std::size_t k = 0; k < n; ++k) y.push_back(value(rng));
    const ElResidualReport r =
        higher_order_el_residual(second_order_toy(), jet_lift(GridFunction::scalar(grid, y), 2));
    for (std::size_t k = 2; k + 2 < n; ++k) {
      const double d4 = y[k + 2] - 4 * y[k + 1] + 6 * y[k] - 4 * y[k - 1] + y[k - 2];
      const double scale = (std::abs(y[k + 2]) + 4 * std::abs(y[k + 1]) + 6 * std::abs(y[k]) +
                            4 * std::abs(y[k - 1]) + std::abs(y[k - 2])) / std::pow(h, 4);
      const double oracle = -y[k] + d4 / std::pow(h, 4);
      worst_toy = std::max(worst_toy, std::abs(r.el[k][0] - oracle) / scale);
    }
  }
  return {worst_l1 <= 1e-10 && worst_match <= 1e-12 && worst_toy <= 1e-12,
          "(i) l=1 on stepper trajectories max " + fmt(worst_l1) +
              " (<= 1e-10); (ii) l=1 vs alpha=1 max relative difference " + fmt(worst_match) +
              " (<= 1e-12); (iii) l=2 toy vs oracles max relative error " + fmt(worst_toy) +
              " (<= 1e-12)"};
}

// ---------------------------------------------------------------------------
// 9. Grid calculus identities

Outcome grid_calculus() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> length(2, 60);
  std::uniform_real_distribution<double> log_step(std::log(1e-3), 0.0);
  std::uniform_real_distribution<double> value(-10.0, 10.0);
  double worst_tel = 0.0;  // |error| / (eps * terms * max|f|)
  double worst_leib = 0.0;  // |error| / (eps * size of the terms)
  for (int g = 0; g < 1000; ++g) {
    const int n = length(rng);
    std::vector<double> t{value(rng)};
    std::vector<double> f{value(rng)};
    std::vector<double> h{value(rng)};
    for (int k = 1; k < n; ++k) {
      t.push_back(t.back() + std::exp(log_step(rng)));
      f.push_back(value(rng));
      h.push_back(value(rng));
    }
    auto grid = std::make_shared<const Grid>(t);
    const GridFunction ff = GridFunction::scalar(grid, f);
    const GridFunction hf = GridFunction::scalar(grid, h);
    const GridFunction df = forward_difference(ff);
    const GridFunction dh = forward_difference(hf);

    std::uniform_int_distribution<int> node(0, n - 1);
    int i = node(rng);
    int j = node(rng);
    if (i > j) std::swap(i, j);
    for (const auto& [a, b] : {std::pair{0, n - 1}, std::pair{i, j}}) {
      const double sum = discrete_integral(df, a, b)[0];
      double fmax = 0.0;
      for (int k = a; k <= b; ++k) fmax = std::max(fmax, std::abs(f[k]));
      worst_tel = std::max(worst_tel, std::abs(sum - (f[b] - f[a])) /
                                          (kEps * (b - a + 1) * std::max(fmax, 1e-300)));
    }

    std::vector<double> prod;
    for (int k = 0; k < n; ++k) prod.push_back(f[k] * h[k]);
    const GridFunction dprod = forward_difference(GridFunction::scalar(grid, prod));
    for (int k = 0; k + 1 < n; ++k) {
      const double rhs = f[k + 1] * dh[k][0] + df[k][0] * h[k];
      const double scale = (std::abs(f[k + 1] * h[k + 1]) + std::abs(f[k] * h[k]) +
                            std::abs(f[k + 1] * h[k])) / grid->step(k);
      worst_leib = std::max(worst_leib, std::abs(dprod[k][0] - rhs) / (kEps * scale));
    }
  }
  return {worst_tel <= 16.0 && worst_leib <= 16.0,
          "1000 random grids: telescoping max error " + fmt(worst_tel) +
              " ulp-scaled (<= 16), modified Leibniz max error " + fmt(worst_leib) +
              " ulp-scaled (<= 16)"};
}

// ---------------------------------------------------------------------------
// 10. Expression language

using dsl::Expr;
using dsl::NodeKind;

Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (depth == 0 || u(rng) < 0.2) {
    if (u(rng) < 0.6) {
      static const char* names[] = {"q", "p", "t"};
      const int slot = std::uniform_int_distribution<int>(0, 2)(rng);
      return Expr::variable(names[slot], slot);
    }
    if (u(rng) < 0.5) return Expr::number(std::uniform_int_distribution<int>(1, 9)(rng));
    return Expr::number(std::uniform_real_distribution<double>(0.05, 5.0)(rng));
  }
  const double r = u(rng);
  if (r < 0.18) return Expr::binary(NodeKind::Add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
  if (r < 0.32) return Expr::binary(NodeKind::Subtract, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
  if (r < 0.52) return Expr::binary(NodeKind::Multiply, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
  if (r < 0.62) return Expr::binary(NodeKind::Divide, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
  if (r < 0.70) return Expr::negate(random_expr(rng, depth - 1));
  if (r < 0.82) {
    static const int exponents[] = {-2, -1, 2, 3, 4};
    return Expr::power(random_expr(rng, depth - 1), exponents[std::uniform_int_distribution<int>(0, 4)(rng)]);
  }
  static const dsl::Function functions[] = {dsl::Function::Sin, dsl::Function::Cos, dsl::Function::Exp,
                                            dsl::Function::Log, dsl::Function::Sqrt};
  return Expr::call(functions[std::uniform_int_distribution<int>(0, 4)(rng)], random_expr(rng, depth - 1));
}

// Fourth-order central stencils for derivatives 1 to 3 along one slot.
std::optional<double> stencil(const Expr& e, std::array<double, 3> x, int slot, int order, double h) {
  auto f = [&](int j) {
    std::array<double, 3> y = x;
    y[slot] += j * h;
    const double v = dsl::evaluate(e, y);
    if (!std::isfinite(v)) throw EvalError("non-finite");
    return v;
  };
  try {
    switch (order) {
      case 1:
        return (f(-2) - 8 * f(-1) + 8 * f(1) - f(2)) / (12 * h);
      case 2:
        return (-f(-2) + 16 * f(-1) - 30 * f(0) + 16 * f(1) - f(2)) / (12 * h * h);
      default:
        return (-f(3) + 8 * f(2) - 13 * f(1) + 13 * f(-1) - 8 * f(-2) + f(-3)) / (8 * h * h * h);
    }
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

Outcome dsl_checks() {
  const dsl::VariableSet vars = dsl::VariableSet::canonical(1);
  std::vector<Expr> corpus;
  for (const char* src : {"p^2/2 + (1 - cos(q))*(1 - 0.1*sin(0.02*t))", "p^2/2 + q^2/2 + q^4/4",
                          "exp(-q^2)*sin(p*t)", "log(1 + q^2) - sqrt(1 + p^2)", "-q^(-2) + p^3/3",
                          "(q - p)*(q + p)/(2 + cos(t))", "sin(cos(q))*exp(p/3) - t*q"}) {
    corpus.push_back(dsl::parse_expression(src, vars));
  }
  std::mt19937_64 rng(1234);
  while (corpus.size() < 200) corpus.push_back(random_expr(rng, 4));

  std::size_t round_trip_failures = 0;
  for (const Expr& e : corpus) {
    const std::string text = dsl::print(e);
    try {
      const Expr back = dsl::parse_expression(text, vars);
      if (!(back == e) || dsl::print(back) != text) ++round_trip_failures;
    } catch (const Error&) {
      ++round_trip_failures;
    }
  }

  // The oracle is trusted at a point only where halving h moves its value by
  // less than a tenth of the tolerance; points where a stencil leaves the
  // domain or the oracle is unresolved are replaced by another random point.
  const double tolerance[] = {0.0, 1e-6, 1e-6, 1e-4};
  const double steps[] = {0.0, 1e-3, 1e-2, 1e-2};
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  std::uniform_real_distribution<double> tcoord(0.0, 2.0);
  std::size_t checked = 0;
  std::size_t unresolved = 0;
  std::size_t derivative_failures = 0;
  double worst[4] = {0, 0, 0, 0};
  for (const Expr& e : corpus) {
    for (int slot = 0; slot < 3; ++slot) {
      for (int order = 1; order <= 3; ++order) {
        const Expr d = dsl::differentiate(e, slot, order);
        bool done = false;
        for (int attempt = 0; attempt < 40 && !done; ++attempt) {
          const std::array<double, 3> x{coord(rng), coord(rng), tcoord(rng)};
          const auto fd = stencil(e, x, slot, order, steps[order]);
          const auto fd_half = stencil(e, x, slot, order, 0.5 * steps[order]);
          if (!fd || !fd_half) continue;
          double sym;
          try {
            sym = dsl::evaluate(d, x);
          } catch (const EvalError&) {
            continue;
          }
          const double scale = std::max({1.0, std::abs(*fd), std::abs(sym)});
          if (std::abs(*fd - *fd_half) / scale > 0.1 * tolerance[order]) continue;
          const double err = std::abs(sym - *fd_half) / scale;
          worst[order] = std::max(worst[order], err);
          if (!(err <= tolerance[order])) ++derivative_failures;
          ++checked;
          done = true;
        }
        if (!done) ++unresolved;
      }
    }
  }
  const std::size_t total = corpus.size() * 9;
  const bool pass = round_trip_failures == 0 && derivative_failures == 0 &&
                    checked >= static_cast<std::size_t>(0.9 * static_cast<double>(total));
  return {pass, std::to_string(corpus.size()) + " expressions, " +
                    std::to_string(round_trip_failures) + " round-trip failures; " +
                    std::to_string(checked) + "/" + std::to_string(total) +
                    " derivative checks (>= 90% resolved, " + std::to_string(unresolved) +
                    " unresolved), max relative error d1 " + fmt(worst[1]) + ", d2 " +
                    fmt(worst[2]) + " (<= 1e-6), d3 " + fmt(worst[3]) + " (<= 1e-4)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-10"};
  std::vector<int> only;
  std::string out_dir = g_out_dir.string();
  app.add_option("criteria", only, "criterion numbers to run (default: all)")
      ->check(CLI::Range(1, 10));
  app.add_option("--out-dir", out_dir, "directory for the generated CSV files");
  CLI11_PARSE(app, argc, argv);
  g_out_dir = out_dir;

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"autonomous energy conservation", autonomous_energy},
      {"long period of the step lengths", long_period},
      {"phase alignment of step lengths and angle", phase_alignment},
      {"fixed-step symplecticity", fixed_step_symplecticity},
      {"conservation of the discrete symplectic form", omega_conservation},
      {"scheme-oracle equivalence", scheme_oracles},
      {"site density", site_density},
      {"higher-order Euler-Lagrange residuals", higher_order_el},
      {"grid calculus identities", grid_calculus},
      {"expression language", dsl_checks},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
