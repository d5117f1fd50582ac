#include "fracgap_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "fracgap/bounds.hpp"
#include "fracgap/constants.hpp"
#include "fracgap/error.hpp"
#include "fracgap/killed_operator.hpp"
#include "fracgap/montecarlo.hpp"
#include "fracgap/parallel.hpp"
#include "fracgap/report_io.hpp"
#include "fracgap/spectra.hpp"

namespace fracgap::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kAlphaLo = 0.3;
constexpr double kAlphaHi = 1.7;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split(text, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw InvalidArgument("not a number: '" + tok + "'");
    }
    if (pos != tok.size() || !std::isfinite(v)) throw InvalidArgument("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

Ball parse_ball(const std::string& text, int& dim) {
  const auto v = parse_numbers(text);
  if (v.size() == 2) {
    dim = 1;
    return {{v[0], 0.0}, v[1]};
  }
  if (v.size() == 3) {
    dim = 2;
    return {{v[0], v[1]}, v[2]};
  }
  throw InvalidArgument("ball expects c,r or cx,cy,r: '" + text + "'");
}

// Everything a subcommand may read. Unused fields keep their defaults.
struct RunConfig {
  double alpha = 1.0;
  int dim = -1;  // negative: follow the domain
  std::string domain = "interval:-1,1";
  double h = 0.0;
  std::size_t nodes = 0;
  std::uint64_t seed = 1;
  std::string variant = "derived";
  std::string out_dir;
  int workers = 1;
  int eigenpairs = 4;
  double ball_slack = -1.0;  // negative: 10 h
  double identity_tolerance = 1e-8;
  std::vector<double> alphas{0.5, 1.0, 1.5};
  std::vector<double> separations{4.0, 8.0, 16.0, 32.0};
  double two_ball_h = 0.01;
  std::vector<double> slope_range;  // empty: target +- 0.3
  double dt = 1e-3;
  std::size_t paths = 100000;
  std::size_t max_steps = 1000000;
  std::string x0;  // empty: center of the inscribed ball
  double grid_h = -1.0;  // negative: default spacing, 0: no grid comparison
  std::vector<double> fit_window;  // empty: [mean, 4 mean]
};

constexpr std::size_t kDefaultNodes = 1000;

struct Context {
  std::ostream& out;
  std::ostream& err;
  json warnings = json::array();

  void warn(const std::string& msg) {
    err << "warning: " << msg << "\n";
    warnings.push_back(msg);
  }
};

void check_alpha(double alpha, Context& ctx) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
  if (alpha < kAlphaLo || alpha > kAlphaHi) {
    std::ostringstream msg;
    msg << "alpha=" << alpha << " is outside [" << kAlphaLo << ", " << kAlphaHi
        << "]; the discretization loses accuracy near the ends of (0, 2)";
    ctx.warn(msg.str());
  }
}

std::optional<int> dim_hint(const RunConfig& cfg) {
  if (cfg.dim < 0) return std::nullopt;
  if (cfg.dim != 1 && cfg.dim != 2) throw InvalidArgument("dim must be 1 or 2");
  return cfg.dim;
}

double grid_spacing(const RunConfig& cfg, const Domain& domain) {
  if (cfg.h > 0.0) return cfg.h;
  if (cfg.h < 0.0) throw InvalidArgument("h must be positive");
  const std::size_t n = cfg.nodes > 0 ? cfg.nodes : kDefaultNodes;
  return std::pow(domain.volume() / static_cast<double>(n), 1.0 / domain.dim());
}

Point start_point(const RunConfig& cfg, const Domain& domain) {
  if (cfg.x0.empty()) return inscribed_radius(domain).center;
  const Point p = parse_point(cfg.x0, domain.dim());
  if (!domain.contains(p)) throw InvalidArgument("start point lies outside the domain");
  return p;
}

// Exact exit time when the domain is a single ball or interval.
std::optional<double> exact_exit_time(const Domain& domain, const StableParams& p, const Point& x) {
  const auto& shape = domain.shape();
  Point center{};
  double radius = 0.0;
  if (const auto* b = std::get_if<Ball>(&shape)) {
    center = b->center;
    radius = b->radius;
  } else if (const auto* iv = std::get_if<std::vector<Interval>>(&shape); iv && iv->size() == 1) {
    center = {0.5 * ((*iv)[0].lo + (*iv)[0].hi), 0.0};
    radius = 0.5 * ((*iv)[0].hi - (*iv)[0].lo);
  } else if (const auto* bs = std::get_if<std::vector<Ball>>(&shape); bs && bs->size() == 1) {
    center = (*bs)[0].center;
    radius = (*bs)[0].radius;
  } else {
    return std::nullopt;
  }
  const double rel[2] = {x[0] - center[0], x[1] - center[1]};
  if (rel[0] * rel[0] + (p.dim == 2 ? rel[1] * rel[1] : 0.0) >= radius * radius) return 0.0;
  return ball_exit_time_exact(p, radius, std::span<const double>(rel, static_cast<std::size_t>(p.dim)));
}

std::optional<fs::path> output_dir(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) return std::nullopt;
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f.precision(17);
  return f;
}

void write_text(const fs::path& path, const std::string& text) {
  auto f = open_output(path);
  f << text << "\n";
}

json config_json(const RunConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  j["alpha"] = cfg.alpha;
  j["domain"] = cfg.domain;
  j["seed"] = cfg.seed;
  j["variant"] = cfg.variant;
  j["workers"] = cfg.workers;
  return j;
}

int finish(Context& ctx, json report, bool passed) {
  report["warnings"] = ctx.warnings;
  ctx.out << report.dump(2) << "\n";
  return passed ? kSuccess : kVerdictFailure;
}

bool asserted_verdicts(const BoundReport& r, GapVariant variant) {
  const bool gap = variant == GapVariant::stated ? r.verdicts.gap_bound_stated : r.verdicts.gap_bound_derived;
  return r.verdicts.sup_bound && gap && r.verdicts.ball_bound;
}

std::optional<double> slack_of(const RunConfig& cfg) {
  if (cfg.ball_slack < 0.0) return std::nullopt;
  return cfg.ball_slack;
}

std::pair<double, double> slope_range(const RunConfig& cfg, const StableParams& p) {
  if (cfg.slope_range.empty()) {
    const double target = -(p.dim + p.alpha);
    return {target - 0.3, target + 0.3};
  }
  if (cfg.slope_range.size() != 2 || !(cfg.slope_range[0] <= cfg.slope_range[1]))
    throw InvalidArgument("slope-range expects lo,hi with lo <= hi");
  return {cfg.slope_range[0], cfg.slope_range[1]};
}

void write_two_ball_csv(const TwoBallResult& r, std::ostream& out) {
  out << "separation,nodes,lambda1,lambda2,gap,lower_bound,sign_energy,upper_bound_direct,upper_bound_chain,"
         "bracketed\n";
  for (const auto& row : r.rows) {
    out << row.separation << ',' << row.nodes << ',' << row.lambda1 << ',' << row.lambda2 << ',' << row.gap << ','
        << row.lower_bound << ',' << row.sign_energy << ',' << row.upper_bound_direct << ','
        << row.upper_bound_chain << ',' << (row.bracketed ? 1 : 0) << '\n';
  }
  out << "# slope=" << r.slope << " intercept=" << r.intercept << " target=" << -(r.params.dim + r.params.alpha)
      << '\n';
}

// ---- subcommands ----

int cmd_constants(const RunConfig& cfg, Context& ctx) {
  const StableParams p{cfg.alpha, dim_hint(cfg).value_or(1)};
  validate(p);
  check_alpha(p.alpha, ctx);
  const auto c = closed_form_constants(p);
  json j = config_json(cfg, "constants");
  j.erase("domain");
  j.erase("seed");
  j.erase("workers");
  j["dim"] = p.dim;
  j["norm_constant"] = c.norm;
  j["sup_bound_constant"] = c.sup_bound;
  j["gap_bound_constant_stated"] = c.gap_bound_stated;
  j["gap_bound_constant_derived"] = c.gap_bound_derived;
  j["variational_constant"] = c.variational;
  j["ball_exit_time_center"] = c.ball_exit_center;
  j["lambda1_upper_unit_ball"] = c.lambda1_unit_ball;
  j["warnings"] = ctx.warnings;
  if (auto dir = output_dir(cfg)) write_text(*dir / "constants.json", j.dump(2));
  return finish(ctx, std::move(j), true);
}

int cmd_solve(const RunConfig& cfg, Context& ctx) {
  const Domain domain = parse_domain(cfg.domain, dim_hint(cfg));
  check_alpha(cfg.alpha, ctx);
  const GapVariant variant = parse_gap_variant(cfg.variant.c_str());
  if (cfg.eigenpairs < 2) throw InvalidArgument("at least two eigenpairs are needed for the gap");
  const double h = grid_spacing(cfg, domain);
  const auto op = KilledOperator::assemble(rasterize(domain, h), cfg.alpha, {cfg.workers});
  const auto sol = eigenpairs(op, cfg.eigenpairs);
  const auto report = bound_report(op, sol, domain, domain.describe(), slack_of(cfg));
  const auto level = level_set_report(sol, op);
  const bool passed = asserted_verdicts(report, variant);

  json j = config_json(cfg, "solve");
  j["bound_report"] = json::parse(to_json(report));
  j["level_set"] = json::parse(to_json(level));
  j["asserted"] = {{"variant", to_string(variant)}, {"passed", passed}};
  if (auto dir = output_dir(cfg)) {
    auto csv = open_output(*dir / "eigenpairs.csv");
    export_eigenpairs_csv(sol, op.grid(), csv);
    write_text(*dir / "bound_report.json", to_json(report));
    write_text(*dir / "level_set.json", to_json(level));
  }
  return finish(ctx, std::move(j), passed);
}

int cmd_exit_time(const RunConfig& cfg, Context& ctx) {
  const Domain domain = parse_domain(cfg.domain, dim_hint(cfg));
  check_alpha(cfg.alpha, ctx);
  const StableParams p{cfg.alpha, domain.dim()};
  const double h = grid_spacing(cfg, domain);
  const auto op = KilledOperator::assemble(rasterize(domain, h), cfg.alpha, {cfg.workers});
  const auto field = exit_time(op);
  const Point x = start_point(cfg, domain);
  const std::size_t node = nearest_node(op.grid(), x);
  const Point xn = op.grid().node_center(node);

  json j = config_json(cfg, "exit-time");
  j["h"] = h;
  j["nodes"] = op.size();
  j["sup"] = field.sup();
  j["x"] = domain.dim() == 1 ? json::array({xn[0]}) : json::array({xn[0], xn[1]});
  j["value_at_x"] = field.values[static_cast<Eigen::Index>(node)];
  const auto exact = exact_exit_time(domain, p, xn);
  j["exact_at_x"] = exact ? json(*exact) : json(nullptr);
  if (exact) {
    const double radius = inscribed_radius(domain).radius;
    const Vector f = sample_nodes(op.grid(), [&](const Point& y) { return *exact_exit_time(domain, p, y); });
    j["relative_error_at_x"] = std::abs(field.values[static_cast<Eigen::Index>(node)] - *exact) / *exact;
    j["interior_residual"] = exit_time_residual(op, domain, f, 0.5 * radius);
  }
  if (auto dir = output_dir(cfg)) {
    auto csv = open_output(*dir / "exit_time.csv");
    csv << (domain.dim() == 1 ? "node,x,s" : "node,x,y,s") << (exact ? ",exact" : "") << "\n";
    for (std::size_t i = 0; i < op.size(); ++i) {
      const Point c = op.grid().node_center(i);
      csv << i << ',' << c[0];
      if (domain.dim() == 2) csv << ',' << c[1];
      csv << ',' << field.values[static_cast<Eigen::Index>(i)];
      if (exact) csv << ',' << *exact_exit_time(domain, p, c);
      csv << '\n';
    }
  }
  return finish(ctx, std::move(j), true);
}

TwoBallResult run_two_ball(const RunConfig& cfg, const StableParams& p, double h, int workers) {
  return two_ball_experiment(cfg.separations, p, h, workers);
}

int cmd_two_ball(const RunConfig& cfg, Context& ctx) {
  const StableParams p{cfg.alpha, dim_hint(cfg).value_or(1)};
  validate(p);
  check_alpha(p.alpha, ctx);
  const double h = cfg.h > 0.0 ? cfg.h : cfg.two_ball_h;
  const auto result = run_two_ball(cfg, p, h, cfg.workers);
  const auto [lo, hi] = slope_range(cfg, p);
  const bool slope_ok = result.slope >= lo && result.slope <= hi;
  const bool passed = slope_ok && result.all_bracketed() && result.all_monotone();

  json j = config_json(cfg, "two-ball");
  j.erase("domain");
  j["two_ball"] = json::parse(to_json(result));
  j["slope_range"] = {lo, hi};
  j["asserted"] = {{"slope_in_range", slope_ok}, {"passed", passed}};
  if (auto dir = output_dir(cfg)) {
    auto csv = open_output(*dir / "two_ball.csv");
    write_two_ball_csv(result, csv);
    write_text(*dir / "two_ball.json", to_json(result));
  }
  return finish(ctx, std::move(j), passed);
}

int cmd_suite(const RunConfig& cfg, Context& ctx) {
  if (cfg.alphas.empty()) throw InvalidArgument("suite needs at least one alpha");
  for (double a : cfg.alphas) check_alpha(a, ctx);
  const auto entries = verification_suite(cfg.alphas);

  SuiteOptions options;
  options.workers = 1;
  options.ball_slack = slack_of(cfg);
  options.identity_tolerance = cfg.identity_tolerance;

  // Entries run concurrently; each entry is single-threaded so the numbers
  // do not depend on the worker count.
  std::vector<std::optional<SuiteOutcome>> outcomes(entries.size());
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
    try {
      outcomes[i] = run_suite_entry(entries[i], options);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  bool all_passed = true;
  bool any_error = false;
  json rows = json::array();
  std::vector<BoundReport> reports;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    json row;
    row["label"] = entries[i].label;
    row["alpha"] = entries[i].alpha;
    row["h"] = entries[i].h;
    if (!outcomes[i]) {
      any_error = true;
      all_passed = false;
      row["error"] = errors[i];
      ctx.err << "error: " << entries[i].label << " alpha=" << entries[i].alpha << ": " << errors[i] << "\n";
      rows.push_back(std::move(row));
      continue;
    }
    const auto& o = *outcomes[i];
    row["bound_report"] = json::parse(to_json(o.report));
    row["level_set"] = json::parse(to_json(o.level_set));
    row["identity_error"] = o.identity_error;
    row["orthogonality_error"] = o.orthogonality_error;
    row["passed"] = o.passed();
    all_passed = all_passed && o.passed();
    reports.push_back(o.report);
    rows.push_back(std::move(row));
  }

  const StableParams p2{1.0, 1};
  json two_ball;
  bool two_ball_passed = false;
  std::optional<TwoBallResult> tb;
  try {
    tb = run_two_ball(cfg, p2, cfg.two_ball_h, cfg.workers);
    const auto [lo, hi] = slope_range(cfg, p2);
    two_ball_passed = tb->slope >= lo && tb->slope <= hi && tb->all_bracketed() && tb->all_monotone();
    two_ball = json::parse(to_json(*tb));
    two_ball["slope_range"] = {lo, hi};
    two_ball["passed"] = two_ball_passed;
  } catch (const std::exception& e) {
    any_error = true;
    two_ball["error"] = e.what();
    ctx.err << "error: two-ball: " << e.what() << "\n";
  }
  all_passed = all_passed && two_ball_passed;

  json j = config_json(cfg, "suite");
  j.erase("domain");
  j["alphas"] = cfg.alphas;
  j["identity_tolerance"] = cfg.identity_tolerance;
  j["entries"] = std::move(rows);
  j["two_ball"] = std::move(two_ball);
  j["passed"] = all_passed;
  j["warnings"] = ctx.warnings;
  if (auto dir = output_dir(cfg)) {
    auto csv = open_output(*dir / "summary.csv");
    write_summary_csv(csv, reports);
    if (tb) {
      auto tcsv = open_output(*dir / "two_ball.csv");
      write_two_ball_csv(*tb, tcsv);
    }
    write_text(*dir / "suite.json", j.dump(2));
  }
  const int status = finish(ctx, std::move(j), all_passed);
  return any_error ? kNumericalFailure : status;
}

int cmd_mc(const RunConfig& cfg, Context& ctx) {
  const Domain domain = parse_domain(cfg.domain, dim_hint(cfg));
  check_alpha(cfg.alpha, ctx);
  const StableParams p{cfg.alpha, domain.dim()};
  StableSamplerConfig sc;
  sc.alpha = cfg.alpha;
  sc.dim = domain.dim();
  sc.dt = cfg.dt;
  sc.seed = cfg.seed;
  sc.paths = cfg.paths;
  sc.workers = cfg.workers;
  sc.max_steps = cfg.max_steps;
  validate(sc);
  const Point x0 = start_point(cfg, domain);
  const auto est = estimate_exit(sc, domain, x0);

  double t_min = est.mean_exit_time;
  double t_max = 4.0 * est.mean_exit_time;
  if (!cfg.fit_window.empty()) {
    if (cfg.fit_window.size() != 2 || !(cfg.fit_window[0] < cfg.fit_window[1]))
      throw InvalidArgument("fit-window expects t_min,t_max with t_min < t_max");
    t_min = cfg.fit_window[0];
    t_max = cfg.fit_window[1];
  }
  const double slope = survival_log_slope(est, t_min, t_max);

  json j = config_json(cfg, "mc");
  j["dim"] = domain.dim();
  j["dt"] = cfg.dt;
  j["paths"] = est.paths;
  j["x0"] = domain.dim() == 1 ? json::array({x0[0]}) : json::array({x0[0], x0[1]});
  j["mean_exit_time"] = est.mean_exit_time;
  j["ci_halfwidth"] = est.ci_halfwidth;
  j["fit_window"] = {t_min, t_max};
  j["survival_log_slope"] = slope;
  const auto exact = exact_exit_time(domain, p, x0);
  j["exact_exit_time"] = exact ? json(*exact) : json(nullptr);
  if (exact) j["relative_error_exact"] = std::abs(est.mean_exit_time - *exact) / *exact;

  const double grid_h = cfg.grid_h < 0.0 ? (domain.dim() == 1 ? 0.005 : 0.05) : cfg.grid_h;
  std::optional<std::vector<double>> grid_survival;
  if (grid_h > 0.0) {
    const auto op = KilledOperator::assemble(rasterize(domain, grid_h), cfg.alpha, {cfg.workers});
    const auto sol = eigenpairs(op, 2);
    const auto field = exit_time(op);
    const std::size_t node = nearest_node(op.grid(), x0);
    const double grid_mean = field.values[static_cast<Eigen::Index>(node)];
    const double lambda1 = sol.lambdas[0];
    grid_survival = survival_probability(op, node, est.times);
    j["grid"] = {
        {"h", grid_h},
        {"nodes", op.size()},
        {"lambda1", lambda1},
        {"exit_time_at_x0", grid_mean},
        {"delta_mean", est.mean_exit_time - grid_mean},
        {"relative_delta_mean", (est.mean_exit_time - grid_mean) / grid_mean},
        {"delta_rate", -slope - lambda1},
        {"relative_delta_rate", (-slope - lambda1) / lambda1},
    };
    ctx.err << "mc-vs-grid: mean " << est.mean_exit_time << " vs " << grid_mean << " (rel "
            << (est.mean_exit_time - grid_mean) / grid_mean << "), decay rate " << -slope << " vs lambda1 "
            << lambda1 << " (rel " << (-slope - lambda1) / lambda1 << ")\n";
  } else {
    j["grid"] = nullptr;
  }
  j["warnings"] = ctx.warnings;
  if (auto dir = output_dir(cfg)) {
    auto csv = open_output(*dir / "survival.csv");
    export_survival_csv(est, csv);
    if (grid_survival) {
      auto g = open_output(*dir / "survival_grid.csv");
      g << "t,survival\n";
      for (std::size_t i = 0; i < est.times.size(); ++i) g << est.times[i] << ',' << (*grid_survival)[i] << '\n';
    }
    write_text(*dir / "exit_estimate.json", j.dump(2));
  }
  return finish(ctx, std::move(j), true);
}

// ---- argument handling ----

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::string json_to_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += ',';
      s += json_to_arg(e);
    }
    return s;
  }
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw InvalidArgument("unsupported config value " + v.dump());
}

// Pulls --config out of args and appends every file entry whose flag is not
// already on the command line, so explicit flags win.
std::vector<std::string> merge_config(std::vector<std::string> args, const CLI::App& sub) {
  std::string path;
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (*it == "--config") {
      if (std::next(it) == args.end()) throw InvalidArgument("--config needs a file path");
      path = *std::next(it);
      args.erase(it, std::next(it, 2));
      break;
    }
    if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
      args.erase(it);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot read config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    const std::string flag = "--" + name;
    if (sub.get_option_no_throw(flag) == nullptr) continue;  // belongs to another subcommand
    if (has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
      continue;
    }
    args.push_back(flag);
    args.push_back(json_to_arg(value));
  }
  return args;
}

void add_common(CLI::App& sub, RunConfig& cfg, bool with_domain) {
  sub.add_option("--alpha", cfg.alpha, "Stability index in (0, 2)")->capture_default_str();
  sub.add_option("--dim", cfg.dim, "Dimension, 1 or 2 (default: from the domain)");
  sub.add_option("--out", cfg.out_dir, "Output directory for report files");
  sub.add_option("--workers", cfg.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  if (with_domain) {
    sub.add_option("--domain", cfg.domain,
                   "interval:a,b[;c,d] | box:... | ball:... | balls:...;... | boxdiff:... | lshape | mask:path")
        ->capture_default_str();
  }
}

void add_grid(CLI::App& sub, RunConfig& cfg) {
  auto* h = sub.add_option("--h", cfg.h, "Grid spacing");
  sub.add_option("--nodes", cfg.nodes, "Node budget used to pick h when --h is absent")->excludes(h);
}

}  // namespace

Domain parse_domain(const std::string& text, std::optional<int> dim) {
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  const std::string body = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto check = [&](Domain d) {
    if (dim && *dim != d.dim())
      throw InvalidArgument("domain '" + text + "' is " + std::to_string(d.dim()) + "-dimensional but dim=" +
                            std::to_string(*dim));
    return d;
  };

  if (kind == "interval") {
    std::vector<Interval> parts;
    for (const auto& piece : split(body, ';')) {
      const auto v = parse_numbers(piece);
      if (v.size() != 2) throw InvalidArgument("interval expects a,b: '" + piece + "'");
      parts.push_back({v[0], v[1]});
    }
    if (parts.empty()) throw InvalidArgument("interval needs endpoints");
    return check(Domain::intervals(std::move(parts)));
  }
  if (kind == "box") {
    const auto v = parse_numbers(body);
    if (v.size() == 2) return check(Domain::box(1, {v[0], 0.0}, {v[1], 0.0}));
    if (v.size() == 4) return check(Domain::box(2, {v[0], v[1]}, {v[2], v[3]}));
    throw InvalidArgument("box expects a,b or x0,y0,x1,y1");
  }
  if (kind == "ball") {
    int d = 0;
    const Ball b = parse_ball(body, d);
    return check(Domain::ball(d, b.center, b.radius));
  }
  if (kind == "balls") {
    std::vector<Ball> parts;
    int d = 0;
    for (const auto& piece : split(body, ';')) {
      int di = 0;
      parts.push_back(parse_ball(piece, di));
      if (d != 0 && di != d) throw InvalidArgument("balls of mixed dimension");
      d = di;
    }
    if (parts.empty()) throw InvalidArgument("balls needs at least one ball");
    return check(Domain::balls(d, std::move(parts)));
  }
  if (kind == "boxdiff") {
    const auto v = parse_numbers(body);
    if (v.size() != 8) throw InvalidArgument("boxdiff expects eight numbers");
    return check(Domain::box_difference({{{v[0], v[1]}, {v[2], v[3]}}, {{v[4], v[5]}, {v[6], v[7]}}}));
  }
  if (kind == "lshape") {
    if (!trim(body).empty()) throw InvalidArgument("lshape takes no parameters");
    return check(Domain::l_shape());
  }
  if (kind == "mask") {
    if (trim(body).empty()) throw InvalidArgument("mask needs a file path");
    return check(Domain::raster(load_raster_mask(trim(body))));
  }
  throw InvalidArgument("unknown domain kind '" + kind + "'");
}

Point parse_point(const std::string& text, int dim) {
  const auto v = parse_numbers(text);
  if (static_cast<int>(v.size()) != dim) throw InvalidArgument("point '" + text + "' does not have dim coordinates");
  return {v[0], dim == 2 ? v[1] : 0.0};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Spectral gap and exit-time computations for the fractional Laplacian on bounded domains",
               "fracgap"};
  // "-h" is left free so that "--h" can name the grid spacing.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", "fracgap 0.1.0");

  auto* constants = app.add_subcommand("constants", "Closed-form constants for (alpha, dim)");
  add_common(*constants, cfg, false);

  auto* solve = app.add_subcommand("solve", "Eigenpairs, bound report and level-set report for one domain");
  add_common(*solve, cfg, true);
  add_grid(*solve, cfg);
  solve->add_option("--variant", cfg.variant, "Gap constant used for the asserted verdict: stated | derived")
      ->capture_default_str()
      ->check(CLI::IsMember({"stated", "derived"}));
  solve->add_option("--eigenpairs", cfg.eigenpairs, "Number of eigenpairs to compute")->capture_default_str();
  solve->add_option("--ball-slack", cfg.ball_slack, "Relative slack of the ball bound (default 10 h)");

  auto* exit = app.add_subcommand("exit-time", "Expected exit time field");
  add_common(*exit, cfg, true);
  add_grid(*exit, cfg);
  exit->add_option("--x0", cfg.x0, "Point to report, x or x,y (default: inscribed ball center)");

  auto* suite = app.add_subcommand("suite", "Full verification suite and the two-ball experiment");
  suite->add_option("--out", cfg.out_dir, "Output directory for report files");
  suite->add_option("--workers", cfg.workers, "Suite entries run concurrently")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  suite->add_option("--alpha", cfg.alphas, "Stability indices")->delimiter(',')->capture_default_str();
  suite->add_option("--ball-slack", cfg.ball_slack, "Relative slack of the ball bound (default 10 h)");
  suite->add_option("--identity-tolerance", cfg.identity_tolerance, "Tolerance of both discrete identities")
      ->capture_default_str();
  suite->add_option("--separations", cfg.separations, "Two-ball separations")->delimiter(',')->capture_default_str();
  suite->add_option("--two-ball-h", cfg.two_ball_h, "Grid spacing of the two-ball experiment")
      ->capture_default_str();
  suite->add_option("--slope-range", cfg.slope_range, "Accepted fitted slope lo,hi (default -2.3,-1.7)")
      ->delimiter(',');

  auto* two = app.add_subcommand("two-ball", "Gap decay of two unit balls at growing separation");
  add_common(*two, cfg, false);
  two->add_option("--h", cfg.h, "Grid spacing (default --two-ball-h)");
  two->add_option("--two-ball-h", cfg.two_ball_h, "Default grid spacing")->capture_default_str();
  two->add_option("--separations", cfg.separations, "Separations r > 2")->delimiter(',')->capture_default_str();
  two->add_option("--slope-range", cfg.slope_range, "Accepted fitted slope lo,hi (default target +- 0.3)")
      ->delimiter(',');

  auto* mc = app.add_subcommand("mc", "Monte Carlo exit times and survival");
  add_common(*mc, cfg, true);
  mc->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  mc->add_option("--dt", cfg.dt, "Time step")->capture_default_str();
  mc->add_option("--paths", cfg.paths, "Number of paths")->capture_default_str();
  mc->add_option("--max-steps", cfg.max_steps, "Step budget per path")->capture_default_str();
  mc->add_option("--x0", cfg.x0, "Start point, x or x,y (default: inscribed ball center)");
  mc->add_option("--grid-h", cfg.grid_h, "Grid spacing of the comparison solve, 0 to skip");
  mc->add_option("--fit-window", cfg.fit_window, "Survival fit window t_min,t_max (default mean, 4 mean)")
      ->delimiter(',');

  // Consumed by merge_config before parsing; declared for --help.
  std::string config_path;
  for (auto* sub : {constants, solve, exit, suite, two, mc})
    sub->add_option("--config", config_path, "JSON config file; flags on the command line take precedence");

  Context ctx{out, err};
  try {
    std::vector<std::string> full = args;
    if (!full.empty()) {
      if (auto* sub = app.get_subcommand_no_throw(full.front())) {
        std::vector<std::string> tail(full.begin() + 1, full.end());
        tail = merge_config(std::move(tail), *sub);
        full.resize(1);
        full.insert(full.end(), tail.begin(), tail.end());
      }
    }
    std::reverse(full.begin(), full.end());
    app.parse(full);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*constants) return cmd_constants(cfg, ctx);
    if (*solve) return cmd_solve(cfg, ctx);
    if (*exit) return cmd_exit_time(cfg, ctx);
    if (*suite) return cmd_suite(cfg, ctx);
    if (*two) return cmd_two_ball(cfg, ctx);
    if (*mc) return cmd_mc(cfg, ctx);
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GeometryError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace fracgap::cli
