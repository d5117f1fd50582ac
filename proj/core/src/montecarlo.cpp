#include "fracgap/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "fracgap/error.hpp"
#include "fracgap/parallel.hpp"

namespace fracgap {

namespace {

using std::numbers::pi;

constexpr double kZ95 = 1.959963984540054;

// Uniform on the open interval (0, 1), platform independent.
double open_uniform(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

double standard_exponential(Rng& rng) { return -std::log(open_uniform(rng)); }

// Symmetric stable with E exp(i z X) = exp(-|z|^a).
double symmetric_stable(double a, Rng& rng) {
  const double v = pi * (open_uniform(rng) - 0.5);
  const double w = standard_exponential(rng);
  if (a == 1.0) return std::tan(v);
  return std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) * std::pow(std::cos((1.0 - a) * v) / w, (1.0 - a) / a);
}

// Positive stable with E exp(-u S) = exp(-u^b), 0 < b < 1 (Kanter).
double positive_stable(double b, Rng& rng) {
  const double u = pi * open_uniform(rng);
  const double e = standard_exponential(rng);
  return std::sin(b * u) / std::pow(std::sin(u), 1.0 / b) * std::pow(std::sin((1.0 - b) * u) / e, (1.0 - b) / b);
}

std::pair<double, double> gaussian_pair(Rng& rng) {
  const double r = std::sqrt(-2.0 * std::log(open_uniform(rng)));
  const double t = 2.0 * pi * open_uniform(rng);
  return {r * std::cos(t), r * std::sin(t)};
}

std::vector<double> default_times(double dt, double t_max) {
  std::vector<double> t;
  const int points = 200;
  const double step = std::max(dt, t_max / (points - 1));
  for (int k = 0; k < points; ++k) t.push_back(k * step);
  return t;
}

ExitEstimate run_paths(const StableSamplerConfig& cfg, const Domain& domain, const Point& x0,
                       std::span<const double> times, std::uint64_t index_offset) {
  validate(cfg);
  if (domain.dim() != cfg.dim) throw InvalidArgument("sampler dimension differs from the domain dimension");
  if (!domain.contains(x0)) throw InvalidArgument("starting point lies outside the domain");

  std::vector<double> tau(cfg.paths);
  parallel_for(cfg.paths, cfg.workers, [&](std::size_t path) {
    Rng rng = path_rng(cfg.seed, index_offset + path);
    Point x = x0;
    for (std::size_t step = 1;; ++step) {
      const Point dx = sample_stable_increment(cfg.alpha, cfg.dim, cfg.dt, rng);
      x[0] += dx[0];
      x[1] += dx[1];
      if (!domain.contains(x)) {
        tau[path] = static_cast<double>(step) * cfg.dt;
        return;
      }
      if (step >= cfg.max_steps) {
        throw BudgetExceeded("path " + std::to_string(path) + " survived " + std::to_string(cfg.max_steps) +
                             " steps");
      }
    }
  });

  ExitEstimate est;
  est.paths = cfg.paths;
  double sum = 0.0;
  for (double t : tau) sum += t;
  est.mean_exit_time = sum / static_cast<double>(tau.size());
  double ss = 0.0;
  for (double t : tau) ss += (t - est.mean_exit_time) * (t - est.mean_exit_time);
  const double sd = std::sqrt(ss / static_cast<double>(tau.size() - 1));
  est.ci_halfwidth = kZ95 * sd / std::sqrt(static_cast<double>(tau.size()));

  const double t_max = *std::max_element(tau.begin(), tau.end());
  est.times = times.empty() ? default_times(cfg.dt, t_max) : std::vector<double>(times.begin(), times.end());
  std::vector<double> sorted = tau;
  std::sort(sorted.begin(), sorted.end());
  for (double t : est.times) {
    const auto [s, ci] = survival_at(sorted, t);
    est.survival.push_back(s);
    est.survival_ci.push_back(ci);
  }
  est.exit_times = std::move(tau);
  return est;
}

}  // namespace

void validate(const StableSamplerConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 2.0)) throw InvalidArgument("sampler: alpha must lie in (0, 2)");
  if (cfg.dim != 1 && cfg.dim != 2) throw InvalidArgument("sampler: dimension must be 1 or 2");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InvalidArgument("sampler: time step must be positive");
  if (cfg.paths < 1000) throw InvalidArgument("sampler: at least 1000 paths required");
  if (cfg.max_steps < 1) throw InvalidArgument("sampler: step budget must be positive");
}

Rng path_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Point sample_stable_increment(double alpha, int dim, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw InvalidArgument("increment time step must be positive");
  if (dim == 1) return {std::pow(dt, 1.0 / alpha) * symmetric_stable(alpha, rng), 0.0};
  // Brownian motion with generator Laplacian (variance 2t per axis) at an
  // independent (a/2)-stable time: E exp(-|z|^2 S_dt) = exp(-dt |z|^a).
  const double b = alpha / 2.0;
  const double s = std::pow(dt, 1.0 / b) * positive_stable(b, rng);
  const auto [z1, z2] = gaussian_pair(rng);
  const double scale = std::sqrt(2.0 * s);
  return {scale * z1, scale * z2};
}

std::pair<double, double> survival_at(std::span<const double> exit_times, double t) {
  if (exit_times.empty()) return {0.0, 0.0};
  std::size_t alive = 0;
  if (std::is_sorted(exit_times.begin(), exit_times.end())) {
    alive = static_cast<std::size_t>(exit_times.end() - std::lower_bound(exit_times.begin(), exit_times.end(), t));
  } else {
    alive = static_cast<std::size_t>(std::count_if(exit_times.begin(), exit_times.end(), [t](double x) { return x >= t; }));
  }
  const double n = static_cast<double>(exit_times.size());
  const double p = static_cast<double>(alive) / n;
  return {p, kZ95 * std::sqrt(p * (1.0 - p) / n)};
}

ExitEstimate estimate_exit(const StableSamplerConfig& cfg, const Domain& domain, const Point& x0,
                           std::span<const double> times) {
  return run_paths(cfg, domain, x0, times, 0);
}

double survival_log_slope(const ExitEstimate& est, double t_min, double t_max) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < est.times.size(); ++k) {
    if (est.times[k] < t_min || est.times[k] > t_max || !(est.survival[k] > 0.0)) continue;
    x.push_back(est.times[k]);
    y.push_back(std::log(est.survival[k]));
  }
  if (x.size() < 2) throw InvalidArgument("survival_log_slope: fewer than two usable points in the window");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

std::vector<SurvivalVerdict> survival_comparison(const StableSamplerConfig& cfg, const Domain& a, const Point& xa,
                                                 const Domain& b, const Point& xb, std::span<const double> times) {
  const auto ea = run_paths(cfg, a, xa, times, 0);
  const auto eb = run_paths(cfg, b, xb, times, cfg.paths);
  std::vector<SurvivalVerdict> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    SurvivalVerdict v;
    v.t = times[k];
    v.survival_a = ea.survival[k];
    v.survival_b = eb.survival[k];
    v.joint_halfwidth = std::hypot(ea.survival_ci[k], eb.survival_ci[k]);
    v.holds = v.survival_a <= v.survival_b + 2.0 * v.joint_halfwidth;
    out.push_back(v);
  }
  return out;
}

void export_survival_csv(const ExitEstimate& est, std::ostream& out) {
  out.precision(17);
  out << "t,survival,ci\n";
  for (std::size_t k = 0; k < est.times.size(); ++k) {
    out << est.times[k] << ',' << est.survival[k] << ',' << est.survival_ci[k] << '\n';
  }
}

}  // namespace fracgap
