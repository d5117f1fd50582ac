#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fracgap/constants.hpp"
#include "fracgap/error.hpp"
#include "fracgap/killed_operator.hpp"
#include "fracgap/spectra.hpp"

using namespace fracgap;

namespace {

constexpr double kPi = std::numbers::pi;

KilledOperator interval_op(double h, double alpha, double lo = -1.0, double hi = 1.0, int workers = 1) {
  return KilledOperator::assemble(rasterize(Domain::interval(lo, hi), h), alpha, {workers});
}

// A int_{(m-1/2)h}^{(m+1/2)h} y^{-1-a} dy by quadrature.
double cell_rate_1d(double alpha, double h, int m) {
  const double a = norm_constant({alpha, 1});
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double y) { return std::pow(y, -1.0 - alpha); }, (m - 0.5) * h, (m + 0.5) * h, 10, 1e-14);
  return a * v;
}

// Nearest-neighbour second-difference rate that stands in for the
// principal value over the own cell: A h^{-a} int_0^{1/2} y^{1-a} dy.
double self_cell_rate_1d(double alpha, double h) {
  return norm_constant({alpha, 1}) * std::pow(h, -alpha) * std::pow(0.5, 2.0 - alpha) / (2.0 - alpha);
}

}  // namespace

TEST(Operator, SymmetricNonnegativeRates) {
  for (const auto& d : {Domain::interval(-1.0, 1.0), Domain::l_shape()}) {
    const double h = d.dim() == 1 ? 0.02 : 0.1;
    const auto op = KilledOperator::assemble(rasterize(d, h), 0.7);
    const Matrix& m = op.matrix();
    EXPECT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
    for (std::size_t i = 0; i < op.size(); ++i) {
      for (std::size_t j = 0; j < op.size(); ++j) {
        ASSERT_GE(op.weight(i, j), 0.0);
        ASSERT_TRUE(std::isfinite(op.weight(i, j)));
      }
      EXPECT_GT(op.kill()[static_cast<Eigen::Index>(i)], 0.0);
    }
    // Row sums of H are the killing rates.
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(op.size()));
    EXPECT_LT((op.apply(ones) - op.kill()).cwiseAbs().maxCoeff(), 1e-9 * op.kill().maxCoeff());
  }
}

TEST(Operator, OneDimensionalRatesMatchCellIntegrals) {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double h = 0.02;
    const auto op = interval_op(h, alpha);
    const std::size_t i = 50;
    for (int m = 2; m < 40; ++m) {
      const double w = op.weight(i, i + static_cast<std::size_t>(m));
      EXPECT_LT(std::abs(w - cell_rate_1d(alpha, h, m)) / w, 1e-11) << "alpha=" << alpha << " m=" << m;
      EXPECT_EQ(op.weight(i, i + m), op.weight(i, i - m));
    }
    const double w1 = op.weight(i, i + 1);
    const double expected = cell_rate_1d(alpha, h, 1) + self_cell_rate_1d(alpha, h);
    EXPECT_LT(std::abs(w1 - expected) / w1, 1e-11);
  }
}

TEST(Operator, OneDimensionalDiagonalIsTranslationInvariant) {
  // Every node jumps to (or is killed in) the whole line minus its own cell,
  // so H_ii = A h^{-a} (2^{1+a}/a) + 2 * self-cell rate for all i.
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double h = 0.01;
    const auto op = interval_op(h, alpha, -1.0, 2.0);
    const double a = norm_constant({alpha, 1});
    const double diag = a * std::pow(h, -alpha) * std::pow(2.0, 1.0 + alpha) / alpha + 2.0 * self_cell_rate_1d(alpha, h);
    for (std::size_t i = 0; i < op.size(); ++i) {
      ASSERT_LT(std::abs(op.matrix()(i, i) - diag) / diag, 1e-10) << "alpha=" << alpha << " i=" << i;
    }
  }
}

TEST(Operator, TwoDimensionalDiagonalNearlyTranslationInvariant) {
  // The exact total rate out of a cell is
  //   int_{R^2 \ [-1/2,1/2]^2} |y|^{-2-a} dy = (8/a) int_0^{pi/4} (2 cos t)^a dt
  // plus four self-cell links of 2 (1/2)^{2-a} J / (2-a), J = int_0^{pi/4} cos^{a-2} t dt.
  // Near cells use a 3x3 midpoint rule (a few percent low next to the
  // singularity), so the diagonal carries that error. Nodes next to the box
  // edge get part of their near field from the exact tail, hence a small
  // spread between nodes.
  boost::math::quadrature::tanh_sinh<double> q;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double h = 0.05;
    const auto op = KilledOperator::assemble(rasterize(Domain::box(2, {-1.0, -1.0}, {1.0, 1.0}), h), alpha);
    const double ext = 8.0 / alpha * q.integrate([&](double t) { return std::pow(2.0 * std::cos(t), alpha); }, 0.0, kPi / 4);
    const double j = q.integrate([&](double t) { return std::pow(std::cos(t), alpha - 2.0); }, 0.0, kPi / 4);
    const double self = 2.0 * std::pow(0.5, 2.0 - alpha) * j / (2.0 - alpha);
    const double exact = norm_constant({alpha, 2}) * std::pow(h, -alpha) * (ext + 4.0 * self);
    const Vector diag = op.matrix().diagonal();
    EXPECT_LT((diag.maxCoeff() - diag.minCoeff()) / diag.minCoeff(), 5e-3) << alpha;
    EXPECT_LT(std::abs(diag.mean() - exact) / exact, 0.05) << alpha;
  }
}

TEST(Operator, TwoDimensionalNearRatesFollowSubdividedMidpointRule) {
  const double alpha = 1.0;
  const double h = 0.05;
  const auto op = KilledOperator::assemble(rasterize(Domain::box(2, {-1.0, -1.0}, {1.0, 1.0}), h), alpha);
  const auto& g = op.grid();
  const std::size_t i = nearest_node(g, {-0.5, -0.5});
  const double a = norm_constant({alpha, 2});
  boost::math::quadrature::gauss_kronrod<double, 31> gk;
  for (auto [dx, dy] : {std::pair{1, 0}, std::pair{2, 0}, std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
    const std::size_t j = nearest_node(g, {-0.5 + dx * h, -0.5 + dy * h});
    double mid = 0.0;
    for (int u = -1; u <= 1; ++u) {
      for (int v = -1; v <= 1; ++v) mid += std::pow(std::hypot(dx + u / 3.0, dy + v / 3.0), -2.0 - alpha) / 9.0;
    }
    const double cell = gk.integrate(
        [&](double x) {
          return gk.integrate([&](double y) { return std::pow(x * x + y * y, -(2.0 + alpha) / 2.0); }, dy - 0.5,
                              dy + 0.5);
        },
        dx - 0.5, dx + 0.5);
    double expected = a * std::pow(h, -alpha) * mid;
    if (dx + dy == 1) {
      // Nearest neighbours also carry the self-cell correction.
      boost::math::quadrature::tanh_sinh<double> q;
      const double jint = q.integrate([&](double t) { return std::pow(std::cos(t), alpha - 2.0); }, 0.0, kPi / 4);
      expected += a * std::pow(h, -alpha) * 2.0 * std::pow(0.5, 2.0 - alpha) * jint / (2.0 - alpha);
    } else {
      EXPECT_LT(std::abs(mid - cell) / cell, 0.05) << dx << "," << dy;
    }
    EXPECT_LT(std::abs(op.weight(i, j) - expected) / expected, 1e-12) << dx << "," << dy;
  }
}

TEST(Operator, SpecExamples) {
  // Zero in, zero out.
  const auto op = interval_op(0.01, 1.0);
  EXPECT_EQ(op.apply(Vector::Zero(static_cast<Eigen::Index>(op.size()))).cwiseAbs().maxCoeff(), 0.0);
  // Interior residual of the exact exit time at h = 0.01.
  const StableParams p{1.0, 1};
  const Vector s = sample_nodes(op.grid(), [&](const Point& x) {
    const double c[1] = {x[0]};
    return ball_exit_time_exact(p, 1.0, c);
  });
  EXPECT_LE(exit_time_residual(op, Domain::interval(-1.0, 1.0), s, 0.2), 0.05);
  // Disjoint components are linked by positive rates.
  const auto two = KilledOperator::assemble(rasterize(Domain::intervals({{-3.0, -1.0}, {1.0, 3.0}}), 0.05), 1.0);
  EXPECT_GT(two.weight(0, two.size() - 1), 0.0);
  // r^a scaling of exit times.
  const auto wide = interval_op(0.01, 1.0, -2.0, 2.0);
  EXPECT_NEAR(exit_time(wide).sup() / exit_time(op).sup(), 2.0, 0.01);
}

TEST(Operator, AssemblyIndependentOfWorkerCount) {
  const auto grid = rasterize(Domain::l_shape(), 0.08);
  const auto a = KilledOperator::assemble(grid, 1.3, {1});
  const auto b = KilledOperator::assemble(grid, 1.3, {4});
  EXPECT_TRUE(a.matrix() == b.matrix());
  EXPECT_TRUE(a.kill() == b.kill());
}

TEST(Operator, DilationScalesTheOperator) {
  // Rates on rD at spacing r h are r^{-a} times the rates on D at spacing h.
  const double alpha = 0.8;
  const double r = 2.0;
  const auto a = KilledOperator::assemble(rasterize(Domain::ball(2, {0.0, 0.0}, 1.0), 0.1), alpha);
  const auto b = KilledOperator::assemble(rasterize(Domain::ball(2, {0.0, 0.0}, r), 0.1 * r), alpha);
  ASSERT_EQ(a.size(), b.size());
  const double scale = std::pow(r, -alpha);
  EXPECT_LT((b.matrix() - scale * a.matrix()).cwiseAbs().maxCoeff(), 1e-9 * b.matrix().cwiseAbs().maxCoeff());
}

TEST(Operator, AssemblyRejectsOversizedGrids) {
  const auto grid = rasterize(Domain::interval(-1.0, 1.0), 0.002);
  EXPECT_THROW(KilledOperator::assemble(grid, 1.0, {1, 500}), InvalidArgument);
}

TEST(Operator, ExitTimeOfIntervalAtCenter) {
  const auto op = interval_op(0.005, 1.0);
  const auto s = exit_time(op);
  const std::size_t mid = nearest_node(op.grid(), {0.0, 0.0});
  EXPECT_NEAR(s.values[static_cast<Eigen::Index>(mid)], 1.0, 0.02);
  EXPECT_GT(s.values.minCoeff(), 0.0);
}

TEST(Operator, ExitTimeTracksClosedFormAcrossAlpha) {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto op = interval_op(0.005, alpha);
    const auto s = exit_time(op);
    const StableParams p{alpha, 1};
    const double x[1] = {op.grid().node_center(nearest_node(op.grid(), {0.0, 0.0}))[0]};
    const double exact = ball_exit_time_exact(p, 1.0, x);
    EXPECT_LT(std::abs(s.sup() - exact) / exact, 0.05) << alpha;
  }
}

TEST(Operator, ExitTimeOfDisk) {
  const StableParams p{1.0, 2};
  const auto op = KilledOperator::assemble(rasterize(Domain::ball(2, {0.0, 0.0}, 1.0), 0.04), 1.0);
  const auto s = exit_time(op);
  EXPECT_NEAR(s.sup() / ball_exit_time_center(p), 1.0, 0.05);
}

TEST(Operator, ConsistencyResidualDecreases) {
  const StableParams p{1.0, 1};
  const auto d = Domain::interval(-1.0, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {0.02, 0.01, 0.005}) {
    const auto op = KilledOperator::assemble(rasterize(d, h), 1.0);
    const Vector s = sample_nodes(op.grid(), [&](const Point& x) {
      const double c[1] = {x[0]};
      return ball_exit_time_exact(p, 1.0, c);
    });
    const double r = exit_time_residual(op, d, s, 0.5);
    EXPECT_LT(r, prev) << "h=" << h;
    prev = r;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(Operator, SubsetExitTimeIsDominated) {
  // Killing on leaving U only shortens lifetimes.
  const auto op = KilledOperator::assemble(rasterize(Domain::l_shape(), 0.1), 1.0);
  const auto full = exit_time(op);
  NodeSet u;
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (op.grid().node_center(i)[0] < 0.2) u.push_back(i);
  }
  const auto part = exit_time(op, u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    EXPECT_LE(part.values[static_cast<Eigen::Index>(k)], full.values[static_cast<Eigen::Index>(u[k])] * (1 + 1e-12));
  }
  EXPECT_LE(sup_exit_time(op, u), full.sup());
}

TEST(Operator, DynkinSplitReassemblesTheFunction) {
  const auto op = interval_op(0.01, 1.3);
  const Vector f = sample_nodes(op.grid(), [](const Point& x) { return std::cos(2.0 * x[0]) + 2.0; });
  NodeSet u;
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (std::abs(op.grid().node_center(i)[0]) < 0.4) u.push_back(i);
  }
  const auto parts = dynkin_decomposition(op, u, f);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    EXPECT_NEAR(parts.harmonic[e] + parts.green[e], f[static_cast<Eigen::Index>(u[k])], 1e-10);
    // f >= 0 outside U gives a nonnegative harmonic part.
    EXPECT_GE(parts.harmonic[e], 0.0);
  }
  // Green part of the exit time is the exit time of U.
  const auto s = exit_time(op);
  const auto ds = dynkin_decomposition(op, u, s.values);
  const auto su = exit_time(op, u);
  EXPECT_LT((ds.green - su.values).cwiseAbs().maxCoeff(), 1e-10);
  const Vector g = green_apply(op, u, Vector::Ones(static_cast<Eigen::Index>(u.size())));
  EXPECT_LT((g - su.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operator, DynkinSplitOfGroundState) {
  const auto op = interval_op(0.01, 1.0);
  const auto sol = eigenpairs(op, 2);
  const Vector phi = sol.phi(0);
  NodeSet u;
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (phi[static_cast<Eigen::Index>(i)] >= phi.maxCoeff() / 2.0) u.push_back(i);
  }
  const auto parts = dynkin_decomposition(op, u, phi);
  Vector phi_u(static_cast<Eigen::Index>(u.size()));
  for (std::size_t k = 0; k < u.size(); ++k) phi_u[static_cast<Eigen::Index>(k)] = phi[static_cast<Eigen::Index>(u[k])];
  const Vector rebuilt = parts.harmonic + sol.lambdas[0] * green_apply(op, u, phi_u);
  EXPECT_LT((rebuilt - phi_u).cwiseAbs().maxCoeff() / phi_u.maxCoeff(), 1e-10);
  // With U = all nodes there are no exterior values, so the harmonic part vanishes.
  const auto all = dynkin_decomposition(op, all_nodes(op), phi);
  EXPECT_EQ(all.harmonic.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((all.green - phi).cwiseAbs().maxCoeff(), 1e-10 * phi.maxCoeff());
}

TEST(Operator, SubsetValidation) {
  const auto op = interval_op(0.05, 1.0);
  EXPECT_THROW(exit_time(op, NodeSet{}), InvalidArgument);
  EXPECT_THROW(exit_time(op, NodeSet{3, 2}), InvalidArgument);
  EXPECT_THROW(exit_time(op, NodeSet{op.size()}), InvalidArgument);
  EXPECT_EQ(all_nodes(op).size(), op.size());
}

TEST(Operator, SurvivalDecaysAtGroundStateRate) {
  const auto op = interval_op(0.02, 1.0);
  const auto sol = eigenpairs(op, 2);
  const std::size_t mid = nearest_node(op.grid(), {0.0, 0.0});
  const std::vector<double> times{0.0, 0.5, 1.0, 4.0, 6.0};
  const auto s = survival_probability(op, mid, times);
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(s[k], s[k - 1]);
  const double rate = -(std::log(s[4]) - std::log(s[3])) / 2.0;
  EXPECT_LT(std::abs(rate - sol.lambdas[0]) / sol.lambdas[0], 1e-3);
  // Integrating survival recovers the expected exit time.
  std::vector<double> fine;
  for (int k = 0; k <= 4000; ++k) fine.push_back(k * 0.005);
  const auto sf = survival_probability(op, mid, fine);
  double integral = 0.0;
  for (std::size_t k = 1; k < sf.size(); ++k) integral += 0.5 * (sf[k] + sf[k - 1]) * 0.005;
  EXPECT_NEAR(integral, exit_time(op).values[static_cast<Eigen::Index>(mid)], 1e-4);
}

TEST(Operator, TripletExport) {
  const auto op = interval_op(0.25, 1.0);
  std::ostringstream out;
  export_triplets(op, out);
  std::istringstream in(out.str());
  std::size_t n = 0;
  double alpha = 0.0, h = 0.0;
  in >> n >> alpha >> h;
  EXPECT_EQ(n, op.size());
  EXPECT_EQ(alpha, 1.0);
  EXPECT_EQ(h, 0.25);
  std::size_t kills = 0, links = 0;
  std::string tok;
  while (in >> tok) {
    if (tok == "kill") {
      std::size_t i;
      double k;
      in >> i >> k;
      ++kills;
    } else {
      std::size_t j;
      double w;
      in >> j >> w;
      ++links;
    }
  }
  EXPECT_EQ(kills, op.size());
  EXPECT_EQ(links, op.size() * (op.size() - 1) / 2);
}
