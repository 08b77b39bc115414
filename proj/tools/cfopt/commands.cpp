#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfopt/adjoint.hpp"
#include "cfopt/errors.hpp"
#include "cfopt/optimizer.hpp"
#include "cfopt/validation.hpp"
#include "run_config.hpp"

namespace cfopt::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<double> w;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("-c,--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--set", opts.overrides, "Override a config field, key=value (repeatable)");
  sub->add_option("-o,--out", opts.out_dir, "Output directory");
  sub->add_option("--w", opts.w, "Running-cost weight");
  sub->add_option("--dt", opts.dt, "Time step");
  sub->add_option("--seed", opts.seed, "Seed for randomised studies");
}

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
  std::vector<std::string> assignments = opts.overrides;
  if (opts.w) assignments.push_back("w=" + format_double(*opts.w));
  if (opts.dt) assignments.push_back("dt=" + format_double(*opts.dt));
  if (opts.seed) assignments.push_back("seed=" + std::to_string(*opts.seed));
  apply_overrides(cfg, assignments);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (!cfg.output_dir) {
    const char* env = std::getenv(kOutputDirEnv);
    cfg.output_dir = (env && *env) ? std::string(env) : std::string("cfopt_out");
  }
  cfg.validate();
  return cfg;
}

/// Writes CSV and JSON artefacts into one directory. Every file carries the
/// effective configuration: CSVs as a leading '#' line, JSON under "config".
class Output {
 public:
  explicit Output(const RunConfig& cfg) : dir_(*cfg.output_dir), config_(to_json(cfg)) {
    fs::create_directories(dir_);
  }

  void csv(const std::string& name, const std::string& header,
           const std::vector<std::vector<double>>& columns) const {
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << "# config=" << config_.dump() << '\n' << header << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        f << (c ? "," : "") << format_double(columns[c][r]);
      }
      f << '\n';
    }
  }

  void summary(ordered_json body, const std::string& name = "summary.json") const {
    body["config"] = config_;
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << body.dump(2) << '\n';
  }

  [[nodiscard]] const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  ordered_json config_;
};

ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Vector node_times(const TimeGrid& tg, bool include_final) {
  Vector t(tg.n_steps + (include_final ? 1 : 0));
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = tg.node(k);
  return t;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ordered_json run_summary(const RunRecord& run, double w) {
  ordered_json s;
  s["w"] = w;
  s["total_cost"] = run.total_cost;
  s["terminal_cost"] = run.terminal_cost;
  s["running_cost"] = run.total_cost - run.terminal_cost;
  s["iterations"] = run.updates;
  s["termination"] = std::string(to_string(run.reason));
  return s;
}

void write_iterations(const Output& out, const RunRecord& run, const std::string& name) {
  std::vector<double> iter, cost, proj, r, s, eta, bt;
  for (const auto& rec : run.iterations) {
    iter.push_back(rec.iter);
    cost.push_back(rec.cost);
    proj.push_back(rec.proj_residual);
    r.push_back(rec.r);
    s.push_back(rec.s);
    eta.push_back(rec.eta);
    bt.push_back(rec.backtracks);
  }
  out.csv(name, "iter,J,proj_residual,r,s,eta,backtracks", {iter, cost, proj, r, s, eta, bt});
}

// ---------------------------------------------------------------------------

int cmd_forward(const RunConfig& cfg, const std::string& control_csv, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Problem p = cfg.problem();
  Control u = p.constant_control(1.0);
  if (!control_csv.empty()) {
    u.values = read_csv_column(control_csv, 1);
    if (u.size() != p.time.n_steps) {
      throw ConfigError("control", "expected " + std::to_string(p.time.n_steps) + " values");
    }
  }
  const Trajectory traj = p.solve(u);
  const Output out(cfg);
  out.csv("terminal_density.csv", "x,f", {p.grid.centers, traj.terminal()});

  ordered_json s;
  s["terminal_cost"] = terminal_cost(traj.terminal(), p.cost.terminal, p.grid);
  s["total_cost"] = discrete_cost(u, traj, p.cost, p.grid, p.time);
  s["mass_defect"] = traj.mass_defect;
  s["min_value"] = traj.min_value;
  s["min_step"] = traj.min_step;
  s["M0_initial"] = moment(p.initial, 0, p.grid);
  s["M1_initial"] = moment(p.initial, 1, p.grid);
  s["M0_final"] = moment(traj.terminal(), 0, p.grid);
  s["M1_final"] = moment(traj.terminal(), 1, p.grid);
  s["runtime_seconds"] = seconds_since(start);
  out.summary(s);
  log << "terminal_cost " << format_double(s["terminal_cost"].get<double>()) << "\nmass_defect "
      << format_double(traj.mass_defect) << '\n';

  if (traj.min_value < cfg.negativity_floor) {
    throw SolverError("forward: density fell below negativity_floor (" +
                          format_double(traj.min_value) + ")",
                      traj.min_step);
  }
  return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Problem p = cfg.problem();
  const RunRecord run = pgd_run(p, p.constant_control(1.0), cfg.optimizer());
  const Output out(cfg);
  out.csv("control.csv", "t,u", {node_times(p.time, false), run.control.values});
  write_iterations(out, run, "iterations.csv");
  out.csv("terminal_density.csv", "x,f", {p.grid.centers, run.terminal_density});
  ordered_json s = run_summary(run, cfg.w);
  s["runtime_seconds"] = seconds_since(start);
  out.summary(s);
  log << "total_cost " << format_double(run.total_cost) << "\nterminal_cost "
      << format_double(run.terminal_cost) << "\niterations " << run.updates << '\n';
  if (run.reason == Termination::LineSearchStalled) {
    throw LineSearchStalled(cfg.max_backtracks);
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Problem base = cfg.problem();
  const OptimizerConfig opt = cfg.optimizer();
  std::vector<std::future<RunRecord>> jobs;
  for (double w : cfg.sweep_weights) {
    jobs.push_back(std::async(std::launch::async, [&base, &opt, w] {
      const Problem p = base.with_weight(w);
      return pgd_run(p, p.constant_control(1.0), opt);
    }));
  }
  std::vector<RunRecord> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  const Output out(cfg);
  std::vector<double> total, terminal, iters;
  std::vector<std::vector<double>> controls{node_times(base.time, false)};
  std::vector<std::vector<double>> densities{base.grid.centers, base.initial,
                                             base.solve(base.constant_control(1.0)).terminal()};
  std::string control_header = "t";
  std::string density_header = "x,f_initial,f_uncontrolled";
  ordered_json rows = ordered_json::array();
  bool stalled = false;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    const double w = cfg.sweep_weights[i];
    total.push_back(run.total_cost);
    terminal.push_back(run.terminal_cost);
    iters.push_back(run.updates);
    controls.push_back(run.control.values);
    densities.push_back(run.terminal_density);
    control_header += ",u_w" + format_double(w);
    density_header += ",f_w" + format_double(w);
    rows.push_back(run_summary(run, w));
    write_iterations(out, run, "iterations_w" + format_double(w) + ".csv");
    stalled = stalled || run.reason == Termination::LineSearchStalled;
    log << "w " << format_double(w) << " total " << format_double(run.total_cost) << " terminal "
        << format_double(run.terminal_cost) << " iterations " << run.updates << '\n';
  }
  out.csv("sweep.csv", "w,total_cost,terminal_cost,iterations",
          {cfg.sweep_weights, total, terminal, iters});
  out.csv("sweep_controls.csv", control_header, controls);
  out.csv("sweep_densities.csv", density_header, densities);
  ordered_json s;
  s["runs"] = rows;
  s["runtime_seconds"] = seconds_since(start);
  out.summary(s);
  if (stalled) {
    throw LineSearchStalled(cfg.max_backtracks);
  }
  return kExitOk;
}

int cmd_taylor(const RunConfig& cfg, bool with_fd, std::ostream& log) {
  const Problem p = cfg.problem();
  const TaylorReport rep =
      taylor_residual(p, p.constant_control(1.0), cfg.seed, cfg.taylor_epsilons, with_fd);
  const Output out(cfg);
  std::vector<std::vector<double>> cols{rep.epsilons, rep.residuals};
  std::string header = "eps,E_adjoint";
  if (rep.residuals_fd) {
    cols.push_back(*rep.residuals_fd);
    header += ",E_fd";
  }
  out.csv("taylor.csv", header, cols);
  ordered_json s;
  s["dt"] = p.time.dt;
  s["plateau"] = rep.plateau;
  s["seed"] = rep.seed;
  out.summary(s);
  log << "plateau " << format_double(rep.plateau) << '\n';
  return kExitOk;
}

int cmd_mismatch(const RunConfig& cfg, const std::string& oracle_name, std::ostream& log) {
  GradientOracle oracle;
  if (oracle_name == "fd") {
    oracle = GradientOracle::FiniteDifference;
  } else if (oracle_name == "discrete-adjoint") {
    oracle = GradientOracle::DiscreteAdjoint;
  } else {
    throw ConfigError("oracle", "expected fd or discrete-adjoint");
  }
  const Problem p = cfg.problem();
  const MismatchReport rep = gradient_mismatch(p, p.constant_control(1.0), oracle);
  const Output out(cfg);
  out.csv("gradients.csv", "t,g_adjoint_dt,g_discrete",
          {node_times(p.time, false), rep.adjoint_scaled, rep.discrete});
  ordered_json s;
  s["dt"] = p.time.dt;
  s["rho"] = rep.rho;
  s["oracle"] = oracle_name;
  out.summary(s);
  log << "rho " << format_double(rep.rho) << '\n';
  return kExitOk;
}

int cmd_truncation(const RunConfig& cfg, std::ostream& log) {
  const Problem p = cfg.problem();
  const TruncationStudy study =
      truncation_study(p, cfg.kernel_set(), cfg.truncation_levels, cfg.optimizer());
  const Output out(cfg);
  std::vector<double> level, cost, gap, iters;
  ordered_json rows = ordered_json::array();
  for (const auto& r : study.rows) {
    level.push_back(r.level);
    cost.push_back(r.optimal_cost);
    gap.push_back(r.gap);
    iters.push_back(r.iterations);
    rows.push_back({{"level", r.level},
                    {"optimal_cost", r.optimal_cost},
                    {"gap", r.gap},
                    {"iterations", r.iterations},
                    {"termination", std::string(to_string(r.reason))}});
    log << "level " << format_double(r.level) << " J* " << format_double(r.optimal_cost)
        << " gap " << format_double(r.gap) << '\n';
  }
  out.csv("truncation.csv", "level,optimal_cost,gap,iterations", {level, cost, gap, iters});
  ordered_json s;
  s["reference_cost"] = study.reference_cost;
  s["reference_iterations"] = study.reference_iterations;
  s["rows"] = rows;
  out.summary(s);
  return kExitOk;
}

int cmd_lipschitz(const RunConfig& cfg, std::ostream& log) {
  const Problem p = cfg.problem();
  const LipschitzReport rep = lipschitz_probe(p, cfg.lipschitz_pairs, cfg.seed);
  const Output out(cfg);
  ordered_json s;
  s["ratio"] = json_number(rep.ratio);
  s["pairs_used"] = rep.pairs_used;
  s["seed"] = cfg.seed;
  s["dt"] = p.time.dt;
  out.summary(s);
  log << "ratio " << format_double(rep.ratio) << '\n';
  return kExitOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const ordered_json& extra = ordered_json::object()) {
  ordered_json e;
  e["error"] = kind;
  e["message"] = message;
  for (auto it = extra.begin(); it != extra.end(); ++it) e[it.key()] = it.value();
  err << e.dump() << '\n';
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control of coagulation-fragmentation dynamics", "cfopt"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string control_csv;
  std::vector<double> weights;
  std::vector<double> levels;
  bool with_fd = false;
  std::string oracle = "fd";
  std::optional<int> pairs;

  auto* forward = app.add_subcommand("forward", "Simulate the state equation");
  add_common(forward, common);
  forward->add_option("--control", control_csv, "CSV with t,u columns (default u = 1)");

  auto* optimize = app.add_subcommand("optimize", "Projected gradient descent for one weight");
  add_common(optimize, common);

  auto* sweep = app.add_subcommand("sweep", "Optimise for several weights");
  add_common(sweep, common);
  sweep->add_option("--weights", weights, "Comma-separated weights")->delimiter(',');

  auto* taylor = app.add_subcommand("taylor", "Taylor test of the adjoint gradient");
  add_common(taylor, common);
  taylor->add_flag("--fd", with_fd, "Also test the finite-difference gradient");

  auto* mismatch = app.add_subcommand("mismatch", "Relative adjoint vs discrete gradient error");
  add_common(mismatch, common);
  mismatch->add_option("--oracle", oracle, "fd or discrete-adjoint");

  auto* truncation = app.add_subcommand("truncation", "Kernel truncation study");
  add_common(truncation, common);
  truncation->add_option("--levels", levels, "Comma-separated truncation levels")->delimiter(',');

  auto* lipschitz = app.add_subcommand("lipschitz", "Control-to-state Lipschitz probe");
  add_common(lipschitz, common);
  lipschitz->add_option("--pairs", pairs, "Number of random control pairs");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitConfig;
  }

  try {
    RunConfig cfg = resolve_config(common);
    if (!weights.empty()) cfg.sweep_weights = weights;
    if (!levels.empty()) cfg.truncation_levels = levels;
    if (pairs) cfg.lipschitz_pairs = *pairs;
    cfg.validate();

    if (forward->parsed()) return cmd_forward(cfg, control_csv, out);
    if (optimize->parsed()) return cmd_optimize(cfg, out);
    if (sweep->parsed()) return cmd_sweep(cfg, out);
    if (taylor->parsed()) return cmd_taylor(cfg, with_fd, out);
    if (mismatch->parsed()) return cmd_mismatch(cfg, oracle, out);
    if (truncation->parsed()) return cmd_truncation(cfg, out);
    if (lipschitz->parsed()) return cmd_lipschitz(cfg, out);
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what(), {{"field", e.field()}});
    return kExitConfig;
  } catch (const SolverError& e) {
    report_error(err, "solver", e.what(), {{"step", e.step()}});
    return kExitSolver;
  } catch (const LineSearchStalled& e) {
    report_error(err, "line_search_stalled", e.what(), {{"backtracks", e.backtracks()}});
    return kExitStalled;
  } catch (const std::exception& e) {
    report_error(err, "failure", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace cfopt::cli
