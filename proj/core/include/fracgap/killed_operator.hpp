#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracgap/geometry.hpp"

namespace fracgap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted, duplicate-free list of inside-node indices.
using NodeSet = std::vector<std::size_t>;

struct AssemblyOptions {
  int workers = 1;
  /// Dense storage cap.
  std::size_t max_nodes = 5000;
};

/// Discrete negative Dirichlet fractional Laplacian on the inside nodes of a
/// grid: the generator of a continuous-time Markov chain that jumps between
/// inside cells at rates w_ij and is killed at rate kappa_i.
///
/// Stored as the dense symmetric matrix H with H_ii = sum_j w_ij + kappa_i
/// and H_ij = -w_ij.
///
/// w_ij = A h^{-a} T(x_j - x_i) where T is the dimensionless integral of
/// |y|^{-d-a} over the target cell (closed form in 1D; in 2D a 3x3 midpoint
/// subdivision for |i-j|_inf <= 2 and plain midpoint beyond). The principal
/// value over the own cell enters as a nearest-neighbour second difference,
/// which becomes killing when the neighbour is outside. kappa_i also
/// collects every outside cell of the bounding box and the closed-form tail
/// over the complement of the box.
class KilledOperator {
 public:
  static KilledOperator assemble(const Grid& grid, double alpha, const AssemblyOptions& options = {});

  std::size_t size() const { return static_cast<std::size_t>(h_.rows()); }
  double alpha() const { return alpha_; }
  double h() const { return grid_.h; }
  int dim() const { return grid_.dim; }
  double cell_volume() const { return grid_.cell_volume(); }
  const Grid& grid() const { return grid_; }

  /// Jump rate from node i to node j (0 on the diagonal).
  double weight(std::size_t i, std::size_t j) const { return i == j ? 0.0 : -h_(i, j); }
  const Vector& kill() const { return kill_; }
  const Matrix& matrix() const { return h_; }

  Vector apply(const Vector& x) const { return h_ * x; }

 private:
  KilledOperator(Grid grid, double alpha, Matrix h, Vector kill)
      : grid_(std::move(grid)), alpha_(alpha), h_(std::move(h)), kill_(std::move(kill)) {}

  Grid grid_;
  double alpha_;
  Matrix h_;
  Vector kill_;
};

/// Expected exit time per inside node: the solution of H s = 1.
struct ExitTimeField {
  Vector values;
  double sup() const { return values.maxCoeff(); }
};

ExitTimeField exit_time(const KilledOperator& op);

/// Exit-time field of the chain killed on leaving `subset` (the sub-operator
/// H_UU), indexed like `subset`.
ExitTimeField exit_time(const KilledOperator& op, const NodeSet& subset);

/// sup over `subset` of the exit time of the chain killed on leaving it.
double sup_exit_time(const KilledOperator& op, const NodeSet& subset);

/// Block split of f over U = subset into the part carried by the exterior
/// values (discrete harmonic measure) and the Green part:
///   harmonic = H_UU^{-1} W_{U,U^c} f|_{U^c}
///   green    = H_UU^{-1} (H f)|_U
/// so that f|_U = harmonic + green exactly. Both vectors are indexed like
/// `subset`.
struct DynkinParts {
  Vector harmonic;
  Vector green;
};

DynkinParts dynkin_decomposition(const KilledOperator& op, const NodeSet& subset, const Vector& f);

/// H_UU^{-1} g for g indexed like `subset`.
Vector green_apply(const KilledOperator& op, const NodeSet& subset, const Vector& g);

/// max |(H f)_i - 1| over inside nodes at distance >= margin from the
/// complement of `domain`. With f the exact exit time this is the
/// consistency error of the discretization.
double exit_time_residual(const KilledOperator& op, const Domain& domain, const Vector& f, double margin);

/// All inside nodes.
NodeSet all_nodes(const KilledOperator& op);

/// Values of fn at the inside-node centers.
template <class Fn>
Vector sample_nodes(const Grid& grid, Fn&& fn) {
  Vector v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(grid.node_center(i));
  return v;
}

/// Survival probabilities P_x(tau >= t) = (exp(-t H) 1)_x of the chain
/// started at `node`, for each t in `times`.
std::vector<double> survival_probability(const KilledOperator& op, std::size_t node, std::span<const double> times);

/// Inside node whose center is closest to p.
std::size_t nearest_node(const Grid& grid, const Point& p);

/// Debug dump: "n alpha h" header, "i j w_ij" for i < j with w_ij != 0,
/// then "kill i kappa_i" lines.
void export_triplets(const KilledOperator& op, std::ostream& out);

}  // namespace fracgap
