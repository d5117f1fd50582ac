#include "fracgap/killed_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "fracgap/constants.hpp"
#include "fracgap/error.hpp"
#include "fracgap/parallel.hpp"
#include "quadrature.hpp"

namespace fracgap {

namespace {

// Dimensionless cell integrals of |y|^{-d-a} (unit spacing), indexed by
// absolute lattice offset.
class KernelTable {
 public:
  KernelTable(int dim, double alpha, int ex, int ey) : ex_(ex), ey_(ey) {
    values_.assign(static_cast<std::size_t>(ex) * ey, 0.0);
    for (int l = 0; l < ey; ++l) {
      for (int k = 0; k < ex; ++k) {
        if (k == 0 && l == 0) continue;
        values_[static_cast<std::size_t>(l) * ex + k] = dim == 1 ? cell_1d(alpha, k) : cell_2d(alpha, k, l);
      }
    }
  }

  double operator()(int dk, int dl) const {
    return values_[static_cast<std::size_t>(std::abs(dl)) * ex_ + std::abs(dk)];
  }

 private:
  static double cell_1d(double a, int m) { return (std::pow(m - 0.5, -a) - std::pow(m + 0.5, -a)) / a; }

  static double cell_2d(double a, int k, int l) {
    const double e = -(2.0 + a) / 2.0;
    if (std::max(k, l) > 2) return std::pow(double(k) * k + double(l) * l, e);
    double s = 0.0;
    for (int u = -1; u <= 1; ++u) {
      for (int v = -1; v <= 1; ++v) {
        const double x = k + u / 3.0;
        const double y = l + v / 3.0;
        s += std::pow(x * x + y * y, e);
      }
    }
    return s / 9.0;
  }

  int ex_;
  int ey_;
  std::vector<double> values_;
};

// Weight added to each nearest-neighbour link so the scheme reproduces the
// principal value over the own cell on quadratics: the second-order Taylor
// term integrated over the cell, spread over the 2d neighbours of the
// standard second difference. Dimensionless (multiply by A h^{-a}).
double self_cell_correction(int dim, double a) {
  const double base = std::pow(0.5, 2.0 - a) / (2.0 - a);
  if (dim == 1) return base;
  const auto rule = detail::gauss_legendre(32);
  const double j = detail::integrate([a](double t) { return std::pow(std::cos(t), a - 2.0); }, 0.0,
                                     std::numbers::pi / 4.0, rule);
  return 2.0 * base * j;
}

// Dimensionless integral of |y - p|^{-d-a} over the complement of the box
// [0, ex] x [0, ey] (unit spacing).
double box_tail(int dim, double a, double px, double py, double ex, double ey,
                const std::pair<std::vector<double>, std::vector<double>>& rule) {
  if (dim == 1) return (std::pow(px, -a) + std::pow(ex - px, -a)) / a;
  // Each side seen from p at perpendicular distance dist over the angular
  // range [lo, hi] measured from the side's normal:
  //   (1/a) dist^{-a} * int cos^a(psi) dpsi.
  auto side = [&](double dist, double lo_extent, double hi_extent) {
    const double lo = -std::atan(lo_extent / dist);
    const double hi = std::atan(hi_extent / dist);
    return std::pow(dist, -a) *
           detail::integrate([a](double psi) { return std::pow(std::cos(psi), a); }, lo, hi, rule);
  };
  const double s = side(ex - px, py, ey - py) + side(px, ey - py, py) + side(ey - py, ex - px, px) +
                   side(py, px, ex - px);
  return s / a;
}

void require_finite_nonneg(double w, const char* what) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw NumericalError(std::string("assembly produced an invalid ") + what + " value " + std::to_string(w));
  }
}

Matrix block(const Matrix& h, const NodeSet& rows, const NodeSet& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          h(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
    }
  }
  return out;
}

void check_subset(const KilledOperator& op, const NodeSet& subset) {
  if (subset.empty()) throw InvalidArgument("node subset must be nonempty");
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] >= op.size()) throw InvalidArgument("node subset index out of range");
    if (k > 0 && subset[k] <= subset[k - 1]) throw InvalidArgument("node subset must be sorted and unique");
  }
}

NodeSet complement(const KilledOperator& op, const NodeSet& subset) {
  NodeSet out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (k < subset.size() && subset[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

Eigen::LLT<Matrix> factor(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("generator block is not positive definite (Cholesky failed)");
  }
  return llt;
}

}  // namespace

KilledOperator KilledOperator::assemble(const Grid& grid, double alpha, const AssemblyOptions& options) {
  const StableParams p{alpha, grid.dim};
  validate(p);
  const std::size_t n = grid.size();
  if (n < 2) throw GeometryError("operator needs at least 2 inside nodes");
  if (n > options.max_nodes) {
    throw InvalidArgument("grid has " + std::to_string(n) + " inside nodes, above the dense cap of " +
                          std::to_string(options.max_nodes));
  }

  const double scale = norm_constant(p) * std::pow(grid.h, -alpha);
  const KernelTable table(grid.dim, alpha, grid.extent[0], grid.extent[1]);
  const double corr = self_cell_correction(grid.dim, alpha);
  const auto tail_rule = detail::gauss_legendre(32);

  std::vector<std::size_t> outside;
  for (std::size_t b = 0; b < grid.box_cells(); ++b) {
    if (!grid.inside[b]) outside.push_back(b);
  }

  Matrix h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Vector kill(static_cast<Eigen::Index>(n));

  // Column j of the symmetric matrix is row j; each column is written by one
  // worker and summed in a fixed order, so the result is independent of the
  // worker count.
  parallel_for(n, options.workers, [&](std::size_t j) {
    const auto cj = grid.cell_coords(grid.nodes[j]);
    const auto col = static_cast<Eigen::Index>(j);
    double row_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const auto ci = grid.cell_coords(grid.nodes[i]);
      const int dk = ci[0] - cj[0];
      const int dl = ci[1] - cj[1];
      double w = table(dk, dl);
      if (std::abs(dk) + std::abs(dl) == 1) w += corr;
      w *= scale;
      require_finite_nonneg(w, "weight");
      h(static_cast<Eigen::Index>(i), col) = -w;
      row_sum += w;
    }
    double k = 0.0;
    for (std::size_t b : outside) {
      const auto co = grid.cell_coords(b);
      const int dk = co[0] - cj[0];
      const int dl = co[1] - cj[1];
      double w = table(dk, dl);
      if (std::abs(dk) + std::abs(dl) == 1) w += corr;
      k += w;
    }
    k += box_tail(grid.dim, alpha, cj[0] + 0.5, cj[1] + 0.5, grid.extent[0], grid.extent[1], tail_rule);
    k *= scale;
    require_finite_nonneg(k, "killing rate");
    kill[col] = k;
    h(col, col) = row_sum + k;
  });

  return KilledOperator(grid, alpha, std::move(h), std::move(kill));
}

ExitTimeField exit_time(const KilledOperator& op) {
  const auto llt = factor(op.matrix());
  ExitTimeField field{llt.solve(Vector::Ones(static_cast<Eigen::Index>(op.size())))};
  if (!(field.values.minCoeff() > 0.0)) throw NumericalError("exit-time solve produced a non-positive value");
  return field;
}

double exit_time_residual(const KilledOperator& op, const Domain& domain, const Vector& f, double margin) {
  if (f.size() != static_cast<Eigen::Index>(op.size())) throw InvalidArgument("field size does not match the operator");
  const Vector r = op.apply(f);
  double worst = -1.0;
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (domain.distance_to_complement(op.grid().node_center(i)) < margin) continue;
    worst = std::max(worst, std::abs(r[static_cast<Eigen::Index>(i)] - 1.0));
  }
  if (worst < 0.0) throw InvalidArgument("no node lies at the requested distance from the boundary");
  return worst;
}

ExitTimeField exit_time(const KilledOperator& op, const NodeSet& subset) {
  check_subset(op, subset);
  const auto llt = factor(block(op.matrix(), subset, subset));
  ExitTimeField field{llt.solve(Vector::Ones(static_cast<Eigen::Index>(subset.size())))};
  if (!(field.values.minCoeff() > 0.0)) throw NumericalError("exit-time solve produced a non-positive value");
  return field;
}

double sup_exit_time(const KilledOperator& op, const NodeSet& subset) { return exit_time(op, subset).sup(); }

Vector green_apply(const KilledOperator& op, const NodeSet& subset, const Vector& g) {
  check_subset(op, subset);
  if (static_cast<std::size_t>(g.size()) != subset.size()) throw InvalidArgument("green_apply: size mismatch");
  return factor(block(op.matrix(), subset, subset)).solve(g);
}

DynkinParts dynkin_decomposition(const KilledOperator& op, const NodeSet& subset, const Vector& f) {
  check_subset(op, subset);
  if (static_cast<std::size_t>(f.size()) != op.size()) throw InvalidArgument("dynkin_decomposition: size mismatch");
  const NodeSet rest = complement(op, subset);
  const auto llt = factor(block(op.matrix(), subset, subset));

  Vector exterior = Vector::Zero(static_cast<Eigen::Index>(subset.size()));
  if (!rest.empty()) {
    Vector f_rest(static_cast<Eigen::Index>(rest.size()));
    for (std::size_t k = 0; k < rest.size(); ++k) f_rest[static_cast<Eigen::Index>(k)] = f[static_cast<Eigen::Index>(rest[k])];
    exterior = -(block(op.matrix(), subset, rest) * f_rest);
  }
  const Vector hf = op.apply(f);
  Vector hf_u(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k) hf_u[static_cast<Eigen::Index>(k)] = hf[static_cast<Eigen::Index>(subset[k])];
  return {llt.solve(exterior), llt.solve(hf_u)};
}

NodeSet all_nodes(const KilledOperator& op) {
  NodeSet s(op.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
  return s;
}

std::vector<double> survival_probability(const KilledOperator& op, std::size_t node, std::span<const double> times) {
  if (node >= op.size()) throw InvalidArgument("survival_probability: node out of range");
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix());
  if (es.info() != Eigen::Success) throw NumericalError("full eigendecomposition failed");
  const Vector& lam = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  const Vector proj = v.transpose() * Vector::Ones(static_cast<Eigen::Index>(op.size()));
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t < 0.0) throw InvalidArgument("survival_probability: negative time");
    double s = 0.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      s += v(static_cast<Eigen::Index>(node), k) * std::exp(-t * lam[k]) * proj[k];
    }
    out.push_back(s);
  }
  return out;
}

std::size_t nearest_node(const Grid& grid, const Point& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point c = grid.node_center(i);
    const double d = std::hypot(c[0] - p[0], grid.dim == 2 ? c[1] - p[1] : 0.0);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void export_triplets(const KilledOperator& op, std::ostream& out) {
  out.precision(17);
  out << op.size() << ' ' << op.alpha() << ' ' << op.h() << '\n';
  for (std::size_t i = 0; i < op.size(); ++i) {
    for (std::size_t j = i + 1; j < op.size(); ++j) {
      const double w = op.weight(i, j);
      if (w != 0.0) out << i << ' ' << j << ' ' << w << '\n';
    }
  }
  for (std::size_t i = 0; i < op.size(); ++i) out << "kill " << i << ' ' << op.kill()[static_cast<Eigen::Index>(i)] << '\n';
}

}  // namespace fracgap
