#include "varistep/grid.hpp"

#include <algorithm>
#include <string>

#include "varistep/error.hpp"

namespace varistep {

Grid::Grid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) {
    throw InvalidGrid("grid needs at least two nodes, got " + std::to_string(nodes_.size()));
  }
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    if (!(nodes_[k + 1] > nodes_[k])) {
      throw InvalidGrid("grid nodes must be strictly increasing (node " + std::to_string(k + 1) +
                        ")");
    }
  }
}

Grid Grid::uniform(double t0, double h, std::size_t count) {
  std::vector<double> nodes(count);
  for (std::size_t k = 0; k < count; ++k) nodes[k] = t0 + static_cast<double>(k) * h;
  return Grid(std::move(nodes));
}

double Grid::step(std::size_t k) const {
  if (k + 1 >= nodes_.size()) {
    throw InvalidRange("step index " + std::to_string(k) + " out of range");
  }
  return nodes_[k + 1] - nodes_[k];
}

GridFunction::GridFunction(GridPtr grid, std::vector<Vector> values)
    : GridFunction(grid, std::move(values), 0, grid ? grid->size() : 0) {}

GridFunction::GridFunction(GridPtr grid, std::vector<Vector> values, std::size_t first,
                           std::size_t last)
    : grid_(std::move(grid)), values_(std::move(values)), first_(first), last_(last) {
  if (!grid_) throw InvalidGrid("grid function without grid");
  if (values_.size() != grid_->size()) {
    throw InvalidGrid("grid function has " + std::to_string(values_.size()) +
                      " values for a grid of " + std::to_string(grid_->size()) + " nodes");
  }
  if (first_ > last_ || last_ > grid_->size()) {
    throw InvalidRange("defined window out of range");
  }
  if (first_ < last_) {
    dimension_ = static_cast<int>(values_[first_].size());
    for (std::size_t k = first_; k < last_; ++k) {
      if (values_[k].size() != dimension_) {
        throw InvalidInput("grid function values have inconsistent dimensions");
      }
    }
  }
}

GridFunction GridFunction::scalar(GridPtr grid, std::span<const double> samples) {
  std::vector<Vector> values;
  values.reserve(samples.size());
  for (double s : samples) values.push_back(Vector::Constant(1, s));
  return GridFunction(std::move(grid), std::move(values));
}

const Vector& GridFunction::at(std::size_t k) const {
  if (!defined(k)) {
    throw InvalidRange("grid function undefined at node " + std::to_string(k));
  }
  return values_[k];
}

GridFunction forward_difference(const GridFunction& f) {
  if (f.grid()->size() < 2 || f.defined_count() < 2) {
    throw InvalidGrid("forward difference needs at least two defined nodes");
  }
  const Grid& grid = *f.grid();
  std::vector<Vector> out(grid.size());
  for (std::size_t k = f.first(); k + 1 < f.last(); ++k) {
    out[k] = (f[k + 1] - f[k]) / grid.step(k);
  }
  return GridFunction(f.grid(), std::move(out), f.first(), f.last() - 1);
}

GridFunction adjoint_difference(const GridFunction& f) {
  if (f.defined_count() < 2) {
    throw InvalidGrid("adjoint difference needs at least two defined nodes");
  }
  const Grid& grid = *f.grid();
  std::vector<Vector> out(grid.size());
  // The result at node k uses tau_k, so node k must have a successor.
  const std::size_t last = std::min(f.last(), grid.size() - 1);
  if (last <= f.first() + 1) {
    throw InvalidGrid("adjoint difference window is empty");
  }
  for (std::size_t k = f.first() + 1; k < last; ++k) {
    out[k] = -(f[k] - f[k - 1]) / grid.step(k);
  }
  return GridFunction(f.grid(), std::move(out), f.first() + 1, last);
}

GridFunction adjoint_difference_power(const GridFunction& f, int h) {
  if (h < 0) throw InvalidInput("negative operator power");
  GridFunction g = f;
  for (int i = 0; i < h; ++i) g = adjoint_difference(g);
  return g;
}

Vector discrete_integral(const GridFunction& g, std::size_t i, std::size_t j) {
  if (i > j) {
    throw InvalidRange("discrete integral with i > j (" + std::to_string(i) + " > " +
                       std::to_string(j) + ")");
  }
  const Grid& grid = *g.grid();
  if (j > grid.size() - 1 || (i < j && (!g.defined(i) || !g.defined(j - 1)))) {
    throw InvalidRange("integrand undefined on part of [" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
  }
  Vector sum = Vector::Zero(g.dimension());
  for (std::size_t k = i; k < j; ++k) sum += grid.step(k) * g[k];
  return sum;
}

double JetTrajectory::constraint_residual() const {
  double worst = 0.0;
  for (std::size_t m = 1; m < v.size(); ++m) {
    const GridFunction diff = forward_difference(v[m - 1]);
    const std::size_t lo = std::max(diff.first(), v[m].first());
    const std::size_t hi = std::min(diff.last(), v[m].last());
    for (std::size_t k = lo; k < hi; ++k) {
      worst = std::max(worst, (v[m][k] - diff[k]).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

JetTrajectory jet_lift(const GridFunction& q, int order) {
  if (order < 1) throw InvalidGrid("jet order must be at least 1");
  if (q.defined_count() <= static_cast<std::size_t>(order)) {
    throw InvalidGrid("grid of " + std::to_string(q.defined_count()) +
                      " defined nodes is too short for jet order " + std::to_string(order));
  }
  JetTrajectory jet{q.grid(), order, {}, {}};
  jet.v.reserve(order + 1);
  jet.v.push_back(q);
  for (int m = 1; m <= order; ++m) jet.v.push_back(forward_difference(jet.v.back()));
  return jet;
}

}  // namespace varistep
