#include "fracgap/bounds.hpp"

#include <cmath>
#include <numbers>
#include <tuple>

#include "fracgap/error.hpp"

namespace fracgap {

namespace {

using std::numbers::pi;

bool same_relative(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

}  // namespace

InequalityCheck verify_sup_bound(const EigenSolution& sol, const StableParams& p) {
  InequalityCheck c;
  c.lhs = sol.phi(0).maxCoeff();
  c.rhs = sup_bound_constant(p) * std::pow(sol.lambdas[0], p.dim / (2.0 * p.alpha));
  c.holds = c.lhs <= c.rhs;
  return c;
}

InequalityCheck verify_ball_upper_bound(const EigenSolution& sol, const Domain& domain, const StableParams& p,
                                        std::optional<double> slack) {
  const InscribedBall ball = inscribed_radius(domain);
  if (!(ball.radius > 0.0)) throw InvalidArgument("domain has no inscribed ball");
  const double s = slack.value_or(10.0 * sol.h);
  InequalityCheck c;
  c.lhs = sol.lambdas[0];
  c.rhs = lambda1_upper_ball(p, ball.radius);
  c.holds = c.lhs <= c.rhs * (1.0 + s);
  return c;
}

std::vector<ReferenceGapExample> reference_gap_examples() {
  const StableParams p1{1.0, 1};
  const StableParams p2{1.0, 2};
  struct Case {
    const char* label;
    Domain domain;
    StableParams p;
    double reference;
  };
  const Case cases[] = {
      {"interval(-1,1)", Domain::interval(-1.0, 1.0), p1, 1.0 / (3.0 * pi * pi)},
      {"unit-disk", Domain::ball(2, {0.0, 0.0}, 1.0), p2, 3.0 / (256.0 * std::sqrt(pi))},
      {"square(-1,1)^2", Domain::box(2, {-1.0, -1.0}, {1.0, 1.0}), p2, 3.0 / (512.0 * std::sqrt(2.0 * pi))},
  };
  std::vector<ReferenceGapExample> out;
  for (const auto& c : cases) {
    const double lambda1 = lambda1_upper_ball(c.p, inscribed_radius(c.domain).radius);
    const double diam = diameter(c.domain);
    const double stated = gap_lower_bound(c.p, lambda1, diam, GapVariant::stated);
    const double derived = gap_lower_bound(c.p, lambda1, diam, GapVariant::derived);
    out.push_back({c.label, c.domain, c.p.dim, lambda1, diam, stated, derived, c.reference,
                   !same_relative(stated, c.reference, 1e-9)});
  }
  return out;
}

std::optional<double> reference_gap_value(const Domain& domain, const StableParams& p) {
  if (p.alpha != 1.0) return std::nullopt;
  for (const auto& ex : reference_gap_examples()) {
    if (ex.dim == p.dim && ex.domain == domain) return ex.reference_value;
  }
  return std::nullopt;
}

BoundReport verify_gap_bound(const EigenSolution& sol, const Domain& domain, const StableParams& p,
                             const std::string& label) {
  if (sol.count() < 2) throw InvalidArgument("verify_gap_bound: need two eigenpairs");
  BoundReport r;
  r.label = label.empty() ? domain.describe() : label;
  r.domain = domain.describe();
  r.alpha = p.alpha;
  r.dim = p.dim;
  r.h = sol.h;
  r.nodes = static_cast<std::size_t>(sol.phis.rows());
  r.lambda1 = sol.lambdas[0];
  r.lambda2 = sol.lambdas[1];
  r.gap = spectral_gap(sol);
  r.diameter = diameter(domain);
  r.gap_bound_stated = gap_lower_bound(p, r.lambda1, r.diameter, GapVariant::stated);
  r.gap_bound_derived = gap_lower_bound(p, r.lambda1, r.diameter, GapVariant::derived);
  r.verdicts.gap_bound_stated = r.gap >= r.gap_bound_stated;
  r.verdicts.gap_bound_derived = r.gap >= r.gap_bound_derived;
  if (p.alpha == 1.0) {
    for (const auto& ex : reference_gap_examples()) {
      if (ex.dim == p.dim && ex.domain == domain) {
        r.reference_value = ex.reference_value;
        r.reference_pipeline_value = ex.pipeline_stated;
        r.reference_mismatch = ex.mismatch;
      }
    }
  }
  return r;
}

BoundReport bound_report(const KilledOperator& op, const EigenSolution& sol, const Domain& domain,
                         const std::string& label, std::optional<double> ball_slack) {
  const StableParams p{sol.alpha, sol.dim};
  BoundReport r = verify_gap_bound(sol, domain, p, label);

  const auto sup = verify_sup_bound(sol, p);
  r.sup_phi1 = sup.lhs;
  r.sup_bound_rhs = sup.rhs;
  r.verdicts.sup_bound = sup.holds;

  const double slack = ball_slack.value_or(10.0 * sol.h);
  const auto ball = verify_ball_upper_bound(sol, domain, p, slack);
  r.inscribed_radius = inscribed_radius(domain).radius;
  r.ball_bound_rhs = ball.rhs;
  r.ball_bound_slack = slack;
  r.verdicts.ball_bound = ball.holds;

  const Vector phi1 = sol.phi(0);
  const Vector ratio = sol.phi(1).cwiseQuotient(phi1);
  r.variational_energy = variational_energy(op, ratio, phi1);
  r.orthogonality_identity = orthogonality_identity_check(sol);
  return r;
}

RayleighCheck ball_exit_rayleigh_check(const KilledOperator& op, const Domain& domain, const StableParams& p) {
  const InscribedBall ball = inscribed_radius(domain);
  const Vector f = sample_nodes(op.grid(), [&](const Point& x) {
    const Point rel{x[0] - ball.center[0], x[1] - ball.center[1]};
    const double r2 = rel[0] * rel[0] + (p.dim == 2 ? rel[1] * rel[1] : 0.0);
    if (r2 >= ball.radius * ball.radius) return 0.0;
    return ball_exit_time_exact(p, ball.radius, rel);
  });
  if (!(f.squaredNorm() > 0.0)) throw InvalidArgument("inscribed ball contains no grid node");
  return {rayleigh_quotient(op, f), lambda1_upper_ball(p, ball.radius), ball.radius};
}

Domain two_ball_domain(int dim, double separation) {
  if (dim == 1) return Domain::intervals({{-separation - 1.0, -separation + 1.0}, {separation - 1.0, separation + 1.0}});
  return Domain::balls(dim, {{{-separation, 0.0}, 1.0}, {{separation, 0.0}, 1.0}});
}

bool TwoBallResult::all_bracketed() const {
  for (const auto& r : rows) {
    if (!r.bracketed) return false;
  }
  return !rows.empty();
}

bool TwoBallResult::all_monotone() const {
  for (const auto& r : rows) {
    if (!r.lambda1_monotone) return false;
  }
  return !rows.empty();
}

std::pair<double, double> least_squares_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least_squares_line: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("least_squares_line: degenerate abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

TwoBallResult two_ball_experiment(std::span<const double> separations, const StableParams& p, double h, int workers) {
  validate(p);
  if (separations.size() < 2) throw InvalidArgument("two_ball_experiment: need at least two separations");
  TwoBallResult res;
  res.params = p;
  res.h = h;
  const AssemblyOptions opts{workers};
  const double d = p.dim;
  const double cvar = variational_constant(p);
  const double c = sup_bound_constant(p);

  const Domain single = Domain::ball(p.dim, {0.0, 0.0}, 1.0);
  const auto single_op = KilledOperator::assemble(rasterize(single, h), p.alpha, opts);
  res.lambda1_single = eigenpairs(single_op, 2).lambdas[0];

  std::vector<double> logr, loggap;
  for (double r : separations) {
    if (!(r > 2.0)) throw InvalidArgument("two_ball_experiment: separations must exceed 2");
    const Domain dom = two_ball_domain(p.dim, r);
    const Grid grid = rasterize(dom, h);
    NodeSet left, right;
    for (std::size_t i = 0; i < grid.size(); ++i) (grid.node_center(i)[0] < 0.0 ? left : right).push_back(i);
    if (left.size() < 20 || right.size() < 20) {
      throw GeometryError("two_ball_experiment: grid too coarse (a component has fewer than 20 cells)");
    }
    const auto op = KilledOperator::assemble(grid, p.alpha, opts);
    const auto sol = eigenpairs(op, 2);

    TwoBallRow row;
    row.separation = r;
    row.nodes = op.size();
    row.lambda1 = sol.lambdas[0];
    row.lambda2 = sol.lambdas[1];
    row.gap = spectral_gap(sol);
    row.lower_bound = gap_lower_bound(p, row.lambda1, diameter(dom), GapVariant::derived);

    const Vector phi1 = sol.phi(0);
    Vector sign(phi1.size());
    for (Eigen::Index i = 0; i < sign.size(); ++i) sign[i] = grid.node_center(static_cast<std::size_t>(i))[0] < 0.0 ? -1.0 : 1.0;
    row.sign_energy = variational_energy(op, sign, phi1, workers);

    double mass_left = 0.0, mass_right = 0.0;
    for (std::size_t i : left) mass_left += phi1[static_cast<Eigen::Index>(i)];
    for (std::size_t i : right) mass_right += phi1[static_cast<Eigen::Index>(i)];
    mass_left *= op.cell_volume();
    mass_right *= op.cell_volume();
    const double decay = std::pow(r, -(d + p.alpha));
    row.upper_bound_direct = 8.0 * cvar * decay * mass_left * mass_right;
    const double measure_left = static_cast<double>(left.size()) * op.cell_volume();
    const double measure_right = static_cast<double>(right.size()) * op.cell_volume();
    row.upper_bound_chain = 8.0 * cvar * decay * measure_left * measure_right * c * c *
                            std::pow(res.lambda1_single, d / p.alpha);
    row.bracketed = row.lower_bound <= row.gap && row.gap <= row.sign_energy &&
                    row.sign_energy <= row.upper_bound_direct && row.upper_bound_direct <= row.upper_bound_chain;
    row.lambda1_monotone = row.lambda1 <= res.lambda1_single;
    res.rows.push_back(row);
    logr.push_back(std::log(r));
    loggap.push_back(std::log(row.gap));
  }
  std::tie(res.slope, res.intercept) = least_squares_line(logr, loggap);
  return res;
}

std::vector<SuiteEntry> verification_suite(std::span<const double> alphas) {
  std::vector<SuiteEntry> out;
  for (double a : alphas) {
    out.push_back({"interval(-1,1)", Domain::interval(-1.0, 1.0), a, 0.002});
    out.push_back({"interval(-2,2)", Domain::interval(-2.0, 2.0), a, 0.004});
    out.push_back({"two-intervals(+-4)", two_ball_domain(1, 4.0), a, 0.004});
    out.push_back({"square(-1,1)^2", Domain::box(2, {-1.0, -1.0}, {1.0, 1.0}), a, 0.04});
    out.push_back({"unit-disk", Domain::ball(2, {0.0, 0.0}, 1.0), a, 0.04});
    out.push_back({"l-shape", Domain::l_shape(), a, 0.04});
  }
  return out;
}

SuiteOutcome run_suite_entry(const SuiteEntry& entry, const SuiteOptions& options) {
  const auto op = KilledOperator::assemble(rasterize(entry.domain, entry.h), entry.alpha, {options.workers});
  const auto sol = eigenpairs(op, 4);
  SuiteOutcome out;
  out.identity_tolerance = options.identity_tolerance;
  out.report = bound_report(op, sol, entry.domain, entry.label, options.ball_slack);
  out.level_set = level_set_report(sol, op);
  out.identity_error = std::abs(out.report.variational_energy - out.report.gap) / out.report.gap;
  out.orthogonality_error = std::abs(out.report.orthogonality_identity - 2.0);
  out.orthonormality = orthonormality_residual(sol);
  return out;
}

}  // namespace fracgap
