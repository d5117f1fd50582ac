#include "fracgap/constants.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "fracgap/error.hpp"

namespace fracgap {

namespace {

using std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

void validate(const StableParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 2.0)) {
    throw InvalidArgument("stable index alpha must lie in (0, 2), got " + std::to_string(p.alpha));
  }
  if (p.dim < 1) {
    throw InvalidArgument("dimension must be >= 1, got " + std::to_string(p.dim));
  }
}

const char* to_string(GapVariant v) {
  return v == GapVariant::stated ? "stated" : "derived";
}

GapVariant parse_gap_variant(const char* s) {
  if (std::strcmp(s, "stated") == 0) return GapVariant::stated;
  if (std::strcmp(s, "derived") == 0) return GapVariant::derived;
  throw InvalidArgument(std::string("unknown gap variant '") + s + "' (expected stated|derived)");
}

double gamma(double x) {
  if (x <= 0.0 && std::nearbyint(x) == x) {
    throw InvalidArgument("gamma: pole at non-positive integer " + std::to_string(x));
  }
  return std::tgamma(x);
}

double unit_ball_volume(int dim) {
  const double d = dim;
  return std::pow(pi, d / 2.0) / gamma(d / 2.0 + 1.0);
}

double norm_constant(const StableParams& p) {
  validate(p);
  const double a = p.alpha;
  const double d = p.dim;
  return std::pow(2.0, a) * gamma((d + a) / 2.0) /
         (std::pow(pi, d / 2.0) * std::abs(gamma(-a / 2.0)));
}

double variational_constant(const StableParams& p) { return norm_constant(p) / 2.0; }

double sup_bound_constant(const StableParams& p) {
  validate(p);
  const double a = p.alpha;
  const double d = p.dim;
  const double g_half_d = gamma(d / 2.0);
  const double inner = 4.0 * g_half_d /
                       (a * std::pow(2.0, a) * gamma((d + a) / 2.0) * gamma(a / 2.0));
  return std::pow(pi, -d / 4.0) * std::sqrt(2.0 * d * g_half_d) * std::pow(inner, d / (2.0 * a));
}

double gap_bound_constant(const StableParams& p, GapVariant variant) {
  const double c = sup_bound_constant(p);
  const double a_norm = norm_constant(p);
  return variant == GapVariant::stated ? a_norm / c : a_norm / (c * c);
}

double ball_exit_time_center(const StableParams& p) {
  validate(p);
  const double a = p.alpha;
  const double d = p.dim;
  return std::pow(2.0, 1.0 - a) * gamma(d / 2.0) /
         (a * gamma((d + a) / 2.0) * gamma(a / 2.0));
}

double ball_exit_time_exact(const StableParams& p, double r, std::span<const double> x) {
  require_positive(r, "ball radius");
  if (x.size() < static_cast<std::size_t>(p.dim)) {
    throw InvalidArgument("ball_exit_time_exact: point has fewer coordinates than the dimension");
  }
  double norm2 = 0.0;
  for (int k = 0; k < p.dim; ++k) norm2 += x[k] * x[k];
  const double rel = norm2 / (r * r);
  if (!(rel < 1.0)) {
    throw InvalidArgument("ball_exit_time_exact: point lies outside the open ball");
  }
  return std::pow(r, p.alpha) * ball_exit_time_center(p) * std::pow(1.0 - rel, p.alpha / 2.0);
}

double lambda1_upper_ball(const StableParams& p, double r) {
  validate(p);
  require_positive(r, "ball radius");
  const double a = p.alpha;
  const double d = p.dim;
  const double num = a * (a + d / 2.0) * std::sqrt(pi) * gamma(a / 2.0) * gamma(a + d / 2.0);
  const double den = (a + d) * gamma((1.0 + a) / 2.0) * gamma(d / 2.0);
  return num / den * std::pow(r, -a);
}

double gap_lower_bound(const StableParams& p, double lambda1, double diam, GapVariant variant) {
  require_positive(lambda1, "lambda1");
  require_positive(diam, "diameter");
  const double a = p.alpha;
  const double d = p.dim;
  return gap_bound_constant(p, variant) * std::pow(lambda1, -d / a) * std::pow(diam, -(d + a));
}

ClosedFormConstants closed_form_constants(const StableParams& p) {
  validate(p);
  ClosedFormConstants k{};
  k.norm = norm_constant(p);
  k.sup_bound = sup_bound_constant(p);
  k.gap_bound_stated = k.norm / k.sup_bound;
  k.gap_bound_derived = k.norm / (k.sup_bound * k.sup_bound);
  k.variational = k.norm / 2.0;
  k.ball_exit_center = ball_exit_time_center(p);
  k.lambda1_unit_ball = lambda1_upper_ball(p, 1.0);
  return k;
}

}  // namespace fracgap
