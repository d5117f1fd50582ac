#pragma once

#include <span>

namespace fracgap {

/// Stable index and spatial dimension of the isotropic stable process.
struct StableParams {
  double alpha = 1.0;
  int dim = 1;
};

/// Throws InvalidArgument unless 0 < alpha < 2 and dim >= 1.
void validate(const StableParams& p);

/// Which form of the spectral-gap constant to use.
///   stated:  A / c   (reproduces the reference interval value)
///   derived: A / c^2 (what the gap argument actually yields when the
///                     sup-norm bound on the ground state is squared)
enum class GapVariant { stated, derived };

const char* to_string(GapVariant v);
GapVariant parse_gap_variant(const char* s);

/// Euler Gamma. Throws InvalidArgument at the poles 0, -1, -2, ...
double gamma(double x);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int dim);

/// Normalization A_{d,alpha} of the singular integral defining the
/// fractional Laplacian:
///   2^a Gamma((d+a)/2) / (pi^{d/2} |Gamma(-a/2)|).
double norm_constant(const StableParams& p);

/// Constant C of the ground-state-weighted Dirichlet form that gives the
/// spectral gap. Equals norm_constant / 2.
double variational_constant(const StableParams& p);

/// Constant c with sup(phi_1) <= c * lambda_1^{d/(2a)}.
double sup_bound_constant(const StableParams& p);

/// Constant c~ of the lower bound gap >= c~ lambda_1^{-d/a} diam^{-(d+a)}.
double gap_bound_constant(const StableParams& p, GapVariant variant);

/// Expected exit time of the unit ball started at its center.
double ball_exit_time_center(const StableParams& p);

/// Expected exit time from B(0, r) started at x (|x| < r):
///   r^a * s_{B(0,1)}(0) * (1 - |x/r|^2)^{a/2}.
/// Only the first p.dim coordinates of x are read.
double ball_exit_time_exact(const StableParams& p, double r, std::span<const double> x);

/// Upper bound on lambda_1 for any domain containing a ball of radius r,
/// obtained by testing the Rayleigh quotient on the ball's exit time.
double lambda1_upper_ball(const StableParams& p, double r);

/// c~(variant) * lambda1^{-d/a} * diam^{-(d+a)}.
double gap_lower_bound(const StableParams& p, double lambda1, double diam, GapVariant variant);

struct ClosedFormConstants {
  double norm;              // A_{d,a}
  double sup_bound;         // c
  double gap_bound_stated;  // A / c
  double gap_bound_derived; // A / c^2
  double variational;       // A / 2
  double ball_exit_center;  // s_{B(0,1)}(0)
  double lambda1_unit_ball; // ball upper bound at r = 1
};

ClosedFormConstants closed_form_constants(const StableParams& p);

}  // namespace fracgap
