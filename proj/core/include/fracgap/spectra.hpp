#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "fracgap/killed_operator.hpp"

namespace fracgap {

/// Lowest eigenpairs of a killed operator. Eigenvectors are grid-normalized
/// (sum_i phi_i^2 h^d = 1); each has its first nonzero coordinate positive
/// and phi_1 is strictly positive.
struct EigenSolution {
  std::vector<double> lambdas;
  Matrix phis;  // column k holds phi_{k+1}
  double h = 0.0;
  double alpha = 0.0;
  int dim = 1;

  std::size_t count() const { return lambdas.size(); }
  double cell_volume() const { return dim == 1 ? h : h * h; }
  Vector phi(std::size_t k) const { return phis.col(static_cast<Eigen::Index>(k)); }
};

/// k smallest eigenpairs of H (2 <= k <= n) from a dense symmetric solver
/// (Householder tridiagonalization, then MRRR on the requested index range).
EigenSolution eigenpairs(const KilledOperator& op, int k);

double spectral_gap(const EigenSolution& sol);

/// max_{i<=j} |<phi_i, phi_j> h^d - delta_ij|.
double orthonormality_residual(const EigenSolution& sol);

/// Ground-state-weighted Dirichlet energy
///   (h^d / 2) sum_{i != j} w_ij (f_i - f_j)^2 phi1_i phi1_j
/// after projecting f to zero weighted mean (sum f phi1^2 h^d = 0) and
/// scaling to unit weighted norm (sum f^2 phi1^2 h^d = 1). w_ij are the
/// operator's jump rates, which already carry one cell volume. Returns 0 if
/// f is constant. Row partial sums are combined pairwise in a fixed order,
/// so the result does not depend on `workers`.
double variational_energy(const KilledOperator& op, const Vector& f, const Vector& phi1, int workers = 1);

/// sum_{i,j} (phi2_i phi1_j - phi2_j phi1_i)^2 h^{2d}.
double orthogonality_identity(const Vector& phi1, const Vector& phi2, double cell_volume);
double orthogonality_identity_check(const EigenSolution& sol);

/// <H f, f> / <f, f>.
double rayleigh_quotient(const KilledOperator& op, const Vector& f);

/// Upper level set of the ground state and the quantities attached to it.
struct LevelSetReport {
  double lambda1 = 0.0;
  double sup_phi = 0.0;        // M
  NodeSet level_set;           // U = {phi1 >= M/2}
  double measure = 0.0;        // |U|_h
  double sup_exit = 0.0;       // sup s_U
  double sandwich = 0.0;       // lambda1 * sup s_U, in [1/2, 2]
  double sup_phi_limit = 0.0;  // 2 |U|^{-1/2}
  bool sup_phi_ok = false;     // M <= 2 |U|^{-1/2}
  double ball_measure = 0.0;   // C0 (sup s_U)^{d/a}, C0 = s_{B(0,1)}(0)^{-d/a} |B(0,1)|
  bool measure_ok = false;     // |U| >= C0 (sup s_U)^{d/a}
};

LevelSetReport level_set_report(const EigenSolution& sol, const KilledOperator& op);

/// CSV with header comment lines carrying lambda1, lambda2, h, alpha and
/// columns node,x[,y],phi1,phi2.
void export_eigenpairs_csv(const EigenSolution& sol, const Grid& grid, std::ostream& out);

}  // namespace fracgap
