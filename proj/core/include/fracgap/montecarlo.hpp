#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "fracgap/geometry.hpp"

namespace fracgap {

struct StableSamplerConfig {
  double alpha = 1.0;
  int dim = 1;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::size_t paths = 100000;
  int workers = 1;
  std::size_t max_steps = 1000000;
};

/// Throws InvalidArgument on a bad configuration (dt <= 0, paths < 1000, ...).
void validate(const StableSamplerConfig& cfg);

using Rng = std::mt19937_64;

/// Independent generator for path `index` of a run seeded with `seed`.
Rng path_rng(std::uint64_t seed, std::uint64_t index);

/// One increment X(dt) of the isotropic alpha-stable process with
/// E exp(i <z, X(dt)>) = exp(-dt |z|^a).
/// 1D: Chambers-Mallows-Stuck. 2D: Gaussian displacement at an
/// (a/2)-stable subordinator time.
Point sample_stable_increment(double alpha, int dim, double dt, Rng& rng);

struct ExitEstimate {
  double mean_exit_time = 0.0;
  double ci_halfwidth = 0.0;  // 95%, normal approximation
  std::size_t paths = 0;
  std::vector<double> times;         // survival table abscissae
  std::vector<double> survival;      // fraction of paths with tau >= t
  std::vector<double> survival_ci;   // 95% halfwidth per entry
  std::vector<double> exit_times;    // per path, in path order
};

/// Discrete-time walk from x0 with step dt until the position leaves D.
/// Exit times are multiples of dt. Survival is tabulated at `times`
/// (defaults to 0, dt*10, ... up to the largest exit time, 200 points).
ExitEstimate estimate_exit(const StableSamplerConfig& cfg, const Domain& domain, const Point& x0,
                           std::span<const double> times = {});

/// Survival fraction and its 95% halfwidth at t for a set of exit times.
std::pair<double, double> survival_at(std::span<const double> exit_times, double t);

/// Least-squares slope of log survival over [t_min, t_max]; entries with
/// zero survival are skipped.
double survival_log_slope(const ExitEstimate& est, double t_min, double t_max);

struct SurvivalVerdict {
  double t = 0.0;
  double survival_a = 0.0;
  double survival_b = 0.0;
  double joint_halfwidth = 0.0;
  bool holds = false;  // survival_a <= survival_b + 2 * joint_halfwidth
};

/// Checks P(tau_A >= t) <= P(tau_B >= t) within Monte Carlo error at each
/// t, starting at xa in A and xb in B. The two runs use disjoint streams.
std::vector<SurvivalVerdict> survival_comparison(const StableSamplerConfig& cfg, const Domain& a, const Point& xa,
                                                 const Domain& b, const Point& xb, std::span<const double> times);

/// CSV "t,survival,ci".
void export_survival_csv(const ExitEstimate& est, std::ostream& out);

}  // namespace fracgap
