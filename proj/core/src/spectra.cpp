#include "fracgap/spectra.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "fracgap/constants.hpp"
#include "fracgap/error.hpp"
#include "fracgap/parallel.hpp"

namespace fracgap {

namespace {

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

void fix_sign(Eigen::Ref<Vector> v) {
  const double tiny = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tiny) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

EigenSolution eigenpairs(const KilledOperator& op, int k) {
  const auto n = static_cast<lapack_int>(op.size());
  if (k < 2 || k > n) throw InvalidArgument("eigenpairs: need 2 <= k <= n");

  Matrix a = op.matrix();  // overwritten by LAPACK
  std::vector<double> w(static_cast<std::size_t>(n));
  Matrix z(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  const double abstol = LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k, abstol,
                                         &found, w.data(), z.data(), n, support.data());
  if (info != 0 || found != k) {
    throw NumericalError("dense eigensolver failed (info=" + std::to_string(info) + ")");
  }

  EigenSolution sol;
  sol.h = op.h();
  sol.alpha = op.alpha();
  sol.dim = op.dim();
  sol.lambdas.assign(w.begin(), w.begin() + k);
  sol.phis = z / std::sqrt(sol.cell_volume());
  for (int c = 0; c < k; ++c) fix_sign(sol.phis.col(c));

  if (!(sol.lambdas[0] > 0.0)) throw NumericalError("lowest eigenvalue is not positive");
  if (!(sol.lambdas[1] > sol.lambdas[0])) throw NumericalError("ground state eigenvalue is not simple");
  if (!(sol.phis.col(0).minCoeff() > 0.0)) throw NumericalError("ground state eigenvector is not strictly positive");
  return sol;
}

double spectral_gap(const EigenSolution& sol) {
  if (sol.count() < 2) throw InvalidArgument("spectral_gap: need at least two eigenpairs");
  return sol.lambdas[1] - sol.lambdas[0];
}

double orthonormality_residual(const EigenSolution& sol) {
  const Matrix gram = sol.phis.transpose() * sol.phis * sol.cell_volume();
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double variational_energy(const KilledOperator& op, const Vector& f, const Vector& phi1, int workers) {
  const auto n = static_cast<Eigen::Index>(op.size());
  if (f.size() != n || phi1.size() != n) throw InvalidArgument("variational_energy: size mismatch");
  if (!(phi1.minCoeff() > 0.0)) throw InvalidArgument("variational_energy: phi1 must be strictly positive");

  const double dv = op.cell_volume();
  const Vector phi2 = phi1.cwiseProduct(phi1);
  Vector g = f.array() - f.dot(phi2) / phi2.sum();
  const double norm2 = g.cwiseProduct(g).dot(phi2) * dv;
  if (norm2 <= 1e-300 || norm2 < 1e-28 * f.cwiseProduct(f).dot(phi2) * dv) return 0.0;
  g /= std::sqrt(norm2);

  const Matrix& h = op.matrix();
  std::vector<double> rows(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double d = g[i] - g[j];
      s += -h(i, j) * d * d * phi1[i];
    }
    rows[jj] = s * phi1[j];
  });
  return 0.5 * dv * pairwise_sum(rows.data(), rows.size());
}

double orthogonality_identity(const Vector& phi1, const Vector& phi2, double cell_volume) {
  if (phi1.size() != phi2.size()) throw InvalidArgument("orthogonality_identity: size mismatch");
  const Eigen::Index n = phi1.size();
  std::vector<double> rows(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = phi2[i] * phi1[j] - phi2[j] * phi1[i];
      s += d * d;
    }
    rows[static_cast<std::size_t>(i)] = s;
  }
  return pairwise_sum(rows.data(), rows.size()) * cell_volume * cell_volume;
}

double orthogonality_identity_check(const EigenSolution& sol) {
  if (sol.count() < 2) throw InvalidArgument("orthogonality_identity_check: need two eigenpairs");
  return orthogonality_identity(sol.phi(0), sol.phi(1), sol.cell_volume());
}

double rayleigh_quotient(const KilledOperator& op, const Vector& f) {
  if (static_cast<std::size_t>(f.size()) != op.size()) throw InvalidArgument("rayleigh_quotient: size mismatch");
  const double ff = f.squaredNorm();
  if (!(ff > 0.0)) throw InvalidArgument("rayleigh_quotient: zero vector");
  return f.dot(op.apply(f)) / ff;
}

LevelSetReport level_set_report(const EigenSolution& sol, const KilledOperator& op) {
  if (static_cast<std::size_t>(sol.phis.rows()) != op.size()) throw InvalidArgument("level_set_report: size mismatch");
  const Vector phi = sol.phi(0);
  LevelSetReport r;
  r.lambda1 = sol.lambdas[0];
  r.sup_phi = phi.maxCoeff();
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (phi[i] >= r.sup_phi / 2.0) r.level_set.push_back(static_cast<std::size_t>(i));
  }
  r.measure = static_cast<double>(r.level_set.size()) * sol.cell_volume();
  r.sup_exit = sup_exit_time(op, r.level_set);
  r.sandwich = r.lambda1 * r.sup_exit;
  r.sup_phi_limit = 2.0 / std::sqrt(r.measure);
  r.sup_phi_ok = r.sup_phi <= r.sup_phi_limit;

  const StableParams p{sol.alpha, sol.dim};
  const double ratio = static_cast<double>(sol.dim) / sol.alpha;
  const double c0 = std::pow(ball_exit_time_center(p), -ratio) * unit_ball_volume(sol.dim);
  r.ball_measure = c0 * std::pow(r.sup_exit, ratio);
  r.measure_ok = r.measure >= r.ball_measure;
  return r;
}

void export_eigenpairs_csv(const EigenSolution& sol, const Grid& grid, std::ostream& out) {
  if (sol.count() < 2 || static_cast<std::size_t>(sol.phis.rows()) != grid.size()) {
    throw InvalidArgument("export_eigenpairs_csv: solution does not match grid");
  }
  out.precision(17);
  out << "# lambda1=" << sol.lambdas[0] << " lambda2=" << sol.lambdas[1] << " h=" << sol.h << " alpha=" << sol.alpha
      << '\n';
  out << (grid.dim == 2 ? "node,x,y,phi1,phi2\n" : "node,x,phi1,phi2\n");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point c = grid.node_center(i);
    out << i << ',' << c[0];
    if (grid.dim == 2) out << ',' << c[1];
    const auto r = static_cast<Eigen::Index>(i);
    out << ',' << sol.phis(r, 0) << ',' << sol.phis(r, 1) << '\n';
  }
}

}  // namespace fracgap
