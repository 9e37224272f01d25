#include "varistep/el_residual.hpp"

#include <algorithm>

#include "varistep/error.hpp"

namespace varistep {
namespace {

std::vector<Vector> jet_at(const JetTrajectory& jet, std::size_t k) {
  std::vector<Vector> slots;
  slots.reserve(jet.v.size());
  for (const GridFunction& v : jet.v) slots.push_back(v[k]);
  return slots;
}

GridFunction combine(const GridFunction& a, const GridFunction& b, double sign) {
  const std::size_t lo = std::max(a.first(), b.first());
  const std::size_t hi = std::min(a.last(), b.last());
  std::vector<Vector> out(a.grid()->size());
  for (std::size_t k = lo; k < hi; ++k) out[k] = a[k] + sign * b[k];
  return GridFunction(a.grid(), std::move(out), lo, std::max(lo, hi));
}

}  // namespace

double max_abs(const GridFunction& f) {
  double worst = 0.0;
  for (std::size_t k = f.first(); k < f.last(); ++k) {
    if (f[k].size() > 0) worst = std::max(worst, f[k].cwiseAbs().maxCoeff());
  }
  return worst;
}

ElResidualReport higher_order_el_residual(const LagrangianModel& lagrangian,
                                          const JetTrajectory& jet) {
  const int l = jet.order;
  if (lagrangian.order() != l) throw InvalidInput("Lagrangian order differs from jet order");
  if (jet.v.size() != static_cast<std::size_t>(l + 1)) throw InvalidInput("jet is incomplete");
  if (jet.v[0].dimension() != lagrangian.dimension()) {
    throw InvalidInput("Lagrangian dimension differs from trajectory dimension");
  }
  const GridPtr& grid = jet.grid;
  const std::size_t n_nodes = grid->size();
  if (n_nodes < static_cast<std::size_t>(2 * l + 1)) {
    throw InvalidGrid("order " + std::to_string(l) + " residuals need at least " +
                      std::to_string(2 * l + 1) + " nodes, got " + std::to_string(n_nodes));
  }

  // Every v_m is defined on [0, N-l), so are the partials D_m.
  const std::size_t top = jet.v[l].last();
  auto ctx = [&](std::size_t k) { return IntervalContext{grid->node(k), grid->step(k)}; };
  std::vector<std::vector<Vector>> d(l + 1, std::vector<Vector>(n_nodes));
  std::vector<double> lval(n_nodes, 0.0);
  for (std::size_t k = 0; k < top; ++k) {
    const std::vector<Vector> slots = jet_at(jet, k);
    for (int m = 0; m <= l; ++m) d[m][k] = lagrangian.partial(m, slots, ctx(k));
    lval[k] = lagrangian.value(slots, ctx(k));
  }
  std::vector<GridFunction> dm;
  for (int m = 0; m <= l; ++m) dm.emplace_back(grid, std::move(d[m]), 0, top);

  // Multipliers from the closed sum of operator powers.
  JetTrajectory out_jet = jet;
  out_jet.lambda.clear();
  for (int m = 1; m <= l; ++m) {
    GridFunction acc = dm[m];
    for (int h = 1; h <= l - m; ++h) acc = combine(acc, adjoint_difference_power(dm[m + h], h), 1.0);
    out_jet.lambda.push_back(std::move(acc));
  }

  GridFunction el = dm[0];
  for (int h = 1; h <= l; ++h) el = combine(el, adjoint_difference_power(dm[h], h), 1.0);

  std::vector<GridFunction> multiplier;
  double max_multiplier = 0.0;
  for (int m = 1; m < l; ++m) {
    const GridFunction recursion = combine(dm[m], adjoint_difference(out_jet.lambda[m]), 1.0);
    multiplier.push_back(combine(out_jet.lambda[m - 1], recursion, -1.0));
    max_multiplier = std::max(max_multiplier, max_abs(multiplier.back()));
  }

  // Energy on [l-1, N-l); its residual on [l-1, N-l-1).
  const std::size_t e_lo = static_cast<std::size_t>(l - 1);
  std::vector<double> energy(n_nodes, 0.0);
  for (std::size_t k = e_lo; k < top; ++k) {
    double e = -lval[k];
    for (int m = 1; m <= l; ++m) e += out_jet.lambda[m - 1][k].dot(jet.v[m][k]);
    energy[k] = e;
  }
  std::vector<Vector> eres(n_nodes);
  for (std::size_t k = e_lo; k + 1 < top; ++k) {
    const double tau = grid->step(k);
    const std::vector<Vector> next = jet_at(jet, k + 1);
    const double frozen = lagrangian.value(next, ctx(k));
    eres[k] = Vector::Constant(1, (energy[k + 1] - energy[k]) / tau + (lval[k + 1] - frozen) / tau);
  }
  GridFunction energy_residual(grid, std::move(eres), e_lo, top - 1);

  ElResidualReport report{std::move(out_jet), std::move(el), std::move(multiplier),
                          std::move(energy_residual)};
  report.max_el = max_abs(report.el);
  report.max_multiplier = max_multiplier;
  report.max_energy = max_abs(report.energy);
  return report;
}

}  // namespace varistep
