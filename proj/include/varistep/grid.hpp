#pragma once

// Difference calculus on a time lattice with variable spacing.
//
// A grid function stores one vector per node but is only *defined* on a
// contiguous window of nodes [first, last). Every difference operator shrinks
// that window instead of extrapolating past the ends of the lattice, so
// residuals are only ever reported on nodes where all required shifts exist.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace varistep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Strictly increasing time nodes t_0 < t_1 < ... < t_{N-1}, N >= 2.
class Grid {
 public:
  explicit Grid(std::vector<double> nodes);

  /// Uniform lattice t_k = t0 + k*h, k = 0..count-1.
  static Grid uniform(double t0, double h, std::size_t count);

  std::size_t size() const noexcept { return nodes_.size(); }
  double node(std::size_t k) const { return nodes_.at(k); }
  /// tau_k = t_{k+1} - t_k, defined for k < size()-1.
  double step(std::size_t k) const;
  std::span<const double> nodes() const noexcept { return nodes_; }

 private:
  std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Vector-valued function on a grid, defined on the window [first, last).
class GridFunction {
 public:
  /// Defined on every node. `values.size()` must equal the grid size and all
  /// values must share one dimension.
  GridFunction(GridPtr grid, std::vector<Vector> values);
  /// Defined on [first, last); entries outside the window are ignored.
  GridFunction(GridPtr grid, std::vector<Vector> values, std::size_t first, std::size_t last);

  /// Scalar samples, dimension 1.
  static GridFunction scalar(GridPtr grid, std::span<const double> samples);

  const GridPtr& grid() const noexcept { return grid_; }
  int dimension() const noexcept { return dimension_; }
  std::size_t first() const noexcept { return first_; }
  std::size_t last() const noexcept { return last_; }
  std::size_t defined_count() const noexcept { return last_ - first_; }
  bool defined(std::size_t k) const noexcept { return k >= first_ && k < last_; }

  /// Throws InvalidRange when k lies outside the defined window.
  const Vector& at(std::size_t k) const;
  const Vector& operator[](std::size_t k) const { return at(k); }

 private:
  GridPtr grid_;
  std::vector<Vector> values_;
  std::size_t first_ = 0;
  std::size_t last_ = 0;
  int dimension_ = 0;
};

/// g^(k) = (f^(k+1) - f^(k)) / tau_k. The window loses its last node.
GridFunction forward_difference(const GridFunction& f);

/// Backward shift followed by a forward difference, negated:
/// g^(k) = -(f^(k) - f^(k-1)) / tau_k. The window loses its first node.
/// This is the summation-by-parts adjoint of forward_difference.
GridFunction adjoint_difference(const GridFunction& f);

/// h-fold composition of adjoint_difference (h = 0 returns f unchanged).
GridFunction adjoint_difference_power(const GridFunction& f, int h);

/// sum_{i <= k < j} tau_k g^(k). Throws InvalidRange for i > j or when g is
/// undefined on any node of [i, j).
Vector discrete_integral(const GridFunction& g, std::size_t i, std::size_t j);

/// Tower of iterated forward differences of q, v_0 = q, v_m = Delta v_{m-1},
/// plus the Lagrange multipliers once they have been computed.
struct JetTrajectory {
  GridPtr grid;
  int order = 0;
  std::vector<GridFunction> v;       // v_0 .. v_order
  std::vector<GridFunction> lambda;  // lambda_1 .. lambda_order, may be empty

  /// Largest |v_m^(k) - Delta_k v_{m-1}^(k)| over all nodes where both sides
  /// are defined.
  double constraint_residual() const;
};

/// Requires order >= 1 and grid length > order; otherwise InvalidGrid.
JetTrajectory jet_lift(const GridFunction& q, int order);

}  // namespace varistep
