#include "cfopt/validation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "cfopt/adjoint.hpp"
#include "cfopt/errors.hpp"
#include "cfopt/rng.hpp"

namespace cfopt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double euclid(std::span<const double> a) { return std::sqrt(dot(a, a)); }

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Vector fd_gradient(const Problem& problem, const Control& u, double h_rel, unsigned threads) {
  if (!(h_rel > 0.0)) {
    throw std::invalid_argument("fd_gradient: h must be > 0");
  }
  const std::size_t n = u.size();
  if (n != problem.time.n_steps) {
    throw std::invalid_argument("fd_gradient: control length mismatch");
  }
  Vector g(n);
  parallel_for(n, threads, [&](std::size_t k) {
    const double h = h_rel * std::max(1.0, std::abs(u.values[k]));
    Vector probe = u.values;
    probe[k] = u.values[k] + h;
    const double up = problem.cost_of(probe);
    probe[k] = u.values[k] - h;
    const double down = problem.cost_of(probe);
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw SolverError("fd_gradient: non-finite cost while probing", k);
    }
    g[k] = (up - down) / (2.0 * h) / problem.time.dt;
  });
  return g;
}

Vector discrete_adjoint_gradient(const Problem& problem, const Control& u) {
  const Trajectory traj = problem.solve(u);
  const auto& grid = problem.grid;
  const auto& mats = problem.kernels;
  const double dt = problem.time.dt;
  const std::size_t n = problem.time.n_steps;

  Vector lambda = terminal_gradient(problem.cost.terminal, grid);
  Vector g(n);
  for (std::size_t k = n; k-- > 0;) {
    const Vector& f = traj.states[k];
    g[k] = dt * (problem.cost.w * (u.values[k] - 1.0) +
                 inner_product(lambda, apply_C(f, mats, grid), grid));
    const Vector dc = coagulation_adjoint(lambda, f, mats, grid);
    const Vector df = fragmentation_adjoint(lambda, mats, grid);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      lambda[i] += dt * (u.values[k] * dc[i] + df[i]);
    }
  }
  return g;
}

Vector taylor_direction(std::uint64_t seed, std::size_t n_steps, double dt) {
  SplitMix64 rng(seed);
  Vector d(n_steps);
  for (double& v : d) {
    v = rng.uniform();
  }
  const double norm = std::sqrt(dot(d, d) * dt);
  if (!(norm > 0.0)) {
    throw std::runtime_error("taylor_direction: degenerate direction");
  }
  for (double& v : d) {
    v /= norm;
  }
  return d;
}

Vector default_taylor_epsilons() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}; }

TaylorReport taylor_residual(const Problem& problem, const Control& u, std::uint64_t seed,
                             std::span<const double> epsilons, bool with_fd) {
  if (epsilons.empty()) {
    throw std::invalid_argument("taylor_residual: empty epsilon sweep");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0) || (i > 0 && !(epsilons[i] < epsilons[i - 1]))) {
      throw std::invalid_argument("taylor_residual: epsilons must be positive and decreasing");
    }
  }
  const double dt = problem.time.dt;
  const Vector d = taylor_direction(seed, u.size(), dt);
  const double base = problem.cost_of(u.values);

  auto directional = [&](const Vector& g) { return dot(g, d) * dt; };
  const double slope_adj = directional(problem.gradient_of(u));
  std::optional<double> slope_fd;
  if (with_fd) {
    slope_fd = directional(fd_gradient(problem, u));
  }

  TaylorReport report;
  report.seed = seed;
  report.epsilons.assign(epsilons.begin(), epsilons.end());
  if (slope_fd) report.residuals_fd.emplace();
  Vector probe(u.size());
  for (double eps : epsilons) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      probe[k] = u.values[k] + eps * d[k];
    }
    const double shifted = problem.cost_of(probe);
    if (!std::isfinite(shifted)) {
      throw SolverError("taylor_residual: non-finite cost", 0);
    }
    report.residuals.push_back(std::abs(shifted - base - eps * slope_adj) / eps);
    if (slope_fd) {
      report.residuals_fd->push_back(std::abs(shifted - base - eps * *slope_fd) / eps);
    }
  }
  // At the largest steps the O(eps) term can cancel the plateau, so only the
  // small-eps tail is used.
  const std::size_t tail = report.residuals.size() / 2;
  report.plateau = *std::min_element(report.residuals.begin() + static_cast<std::ptrdiff_t>(tail),
                                     report.residuals.end());
  return report;
}

MismatchReport gradient_mismatch(const Problem& problem, const Control& u, GradientOracle oracle) {
  MismatchReport report;
  const double dt = problem.time.dt;
  report.adjoint_scaled = problem.gradient_of(u);
  for (double& v : report.adjoint_scaled) {
    v *= dt;
  }
  if (oracle == GradientOracle::FiniteDifference) {
    report.discrete = fd_gradient(problem, u);
    for (double& v : report.discrete) {
      v *= dt;
    }
  } else {
    report.discrete = discrete_adjoint_gradient(problem, u);
  }
  const double den = euclid(report.discrete);
  if (den == 0.0) {
    throw std::runtime_error("gradient_mismatch: discrete gradient vanishes");
  }
  Vector diff(report.discrete.size());
  for (std::size_t k = 0; k < diff.size(); ++k) {
    diff[k] = report.adjoint_scaled[k] - report.discrete[k];
  }
  report.rho = euclid(diff) / den;
  return report;
}

TruncationStudy truncation_study(const Problem& base, const KernelSet& kset,
                                 std::span<const double> levels, const OptimizerConfig& cfg) {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) {
      throw std::invalid_argument("truncation_study: levels must be increasing");
    }
  }
  const Control u0 = base.constant_control(1.0);
  auto optimise = [&](const KernelSet& ks) {
    Problem p = base;
    p.kernels = precompute(ks, base.grid, base.kernels.pairing);
    return pgd_run(p, u0, cfg);
  };

  TruncationStudy study;
  const RunRecord reference = optimise(kset);
  study.reference_cost = reference.total_cost;
  study.reference_iterations = reference.updates;
  for (double level : levels) {
    const RunRecord run = optimise(truncate(kset, level));
    study.rows.push_back({level, run.total_cost, std::abs(run.total_cost - reference.total_cost),
                          run.updates, run.reason});
  }
  return study;
}

LipschitzReport lipschitz_probe(const Problem& problem, int n_pairs, std::uint64_t seed,
                                int segments) {
  if (n_pairs < 1) {
    throw std::invalid_argument("lipschitz_probe: n_pairs must be >= 1");
  }
  if (segments < 1) {
    throw std::invalid_argument("lipschitz_probe: segments must be >= 1");
  }
  const auto& tg = problem.time;
  const auto& b = problem.bounds;
  SplitMix64 rng(seed);

  auto draw = [&](SplitMix64& stream) {
    Vector levels(static_cast<std::size_t>(segments));
    for (double& v : levels) v = stream.uniform(b.u_min, b.u_max);
    Control c = problem.constant_control(1.0);
    for (std::size_t k = 0; k < tg.n_steps; ++k) {
      const double t_mid = (static_cast<double>(k) + 0.5) * tg.dt;
      const auto seg = std::min<std::size_t>(
          levels.size() - 1, static_cast<std::size_t>(t_mid / tg.t_final * segments));
      c.values[k] = levels[seg];
    }
    return c;
  };

  LipschitzReport report;
  for (int p = 0; p < n_pairs; ++p) {
    SplitMix64 stream = rng.split();
    const Control u1 = draw(stream);
    const Control u2 = draw(stream);
    Vector du(u1.size());
    for (std::size_t k = 0; k < du.size(); ++k) du[k] = u2.values[k] - u1.values[k];
    const double control_gap = l2_norm(du, tg.dt);
    if (control_gap == 0.0) {
      continue;
    }
    const Trajectory a = problem.solve(u1);
    const Trajectory c = problem.solve(u2);
    double state_gap = 0.0;
    Vector diff(problem.grid.n_cells);
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = c.states[k][i] - a.states[k][i];
      state_gap = std::max(state_gap, weighted_l1_norm(diff, problem.grid));
    }
    report.ratio = std::max(report.ratio, state_gap / control_gap);
    ++report.pairs_used;
  }
  return report;
}

}  // namespace cfopt
