#include "cfopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "cfopt/errors.hpp"

namespace cfopt {

namespace {

double ratio_or_zero(double num, double den) {
  if (den == 0.0) {
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return num / den;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(eta0 > 0.0)) throw std::invalid_argument("optimizer.eta0 must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("optimizer.beta must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("optimizer.sigma must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("optimizer.eps must be > 0");
  if (max_iter < 0) throw std::invalid_argument("optimizer.max_iter must be >= 0");
  if (max_backtracks < 0) throw std::invalid_argument("optimizer.max_backtracks must be >= 0");
}

double l2_norm(std::span<const double> v, double dt) {
  double acc = 0.0;
  for (double x : v) {
    acc += x * x;
  }
  return std::sqrt(acc * dt);
}

Control project_control(std::span<const double> u_raw, double u_min, double u_max) {
  if (u_min > u_max) {
    throw std::invalid_argument("project_control: u_min > u_max");
  }
  Control out;
  out.bounds = {u_min, u_max};
  out.values.resize(u_raw.size());
  std::transform(u_raw.begin(), u_raw.end(), out.values.begin(),
                 [&](double v) { return std::clamp(v, u_min, u_max); });
  return out;
}

Vector gradient_mapping(const Control& u, std::span<const double> g, double eta) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("gradient_mapping: eta must be > 0");
  }
  if (g.size() != u.size()) {
    throw std::invalid_argument("gradient_mapping: shape mismatch");
  }
  Vector trial(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    trial[k] = u.values[k] - eta * g[k];
  }
  const Control projected = project_control(trial, u.bounds.u_min, u.bounds.u_max);
  Vector out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    out[k] = (u.values[k] - projected.values[k]) / eta;
  }
  return out;
}

ArmijoResult armijo_step(const Control& u, std::span<const double> g, double cost_u,
                         const OptimizerConfig& cfg, double dt, const CostOracle& cost_oracle) {
  if (g.size() != u.size()) {
    throw std::invalid_argument("armijo_step: shape mismatch");
  }
  double eta = cfg.eta0;
  for (int n = 0; n <= cfg.max_backtracks; ++n, eta *= cfg.beta) {
    const Vector mapping = gradient_mapping(u, g, eta);
    Control candidate = u;
    for (std::size_t k = 0; k < u.size(); ++k) {
      candidate.values[k] =
          std::clamp(u.values[k] - eta * g[k], u.bounds.u_min, u.bounds.u_max);
    }
    double trial = std::numeric_limits<double>::infinity();
    try {
      trial = cost_oracle(candidate);
    } catch (const SolverError&) {
    }
    const double decrease = cfg.sigma * eta * std::pow(l2_norm(mapping, dt), 2);
    if (std::isfinite(trial) && trial <= cost_u - decrease) {
      return {std::move(candidate), eta, trial, n};
    }
  }
  throw LineSearchStalled(cfg.max_backtracks);
}

double hamiltonian(double omega, double c, double w) {
  return 0.5 * w * (omega - 1.0) * (omega - 1.0) + omega * c;
}

double hamiltonian_minimiser(double c, double w, const ControlBounds& bounds) {
  if (w > 0.0) {
    return std::clamp(1.0 - c / w, bounds.u_min, bounds.u_max);
  }
  // Linear in omega: bang-bang, ties go to the baseline value clamped.
  if (c > 0.0) return bounds.u_min;
  if (c < 0.0) return bounds.u_max;
  return std::clamp(1.0, bounds.u_min, bounds.u_max);
}

PmpResiduals pmp_residuals(const Control& u, std::span<const double> switching, double w,
                           const TimeGrid& tgrid) {
  if (switching.size() != u.size() || u.size() != tgrid.n_steps) {
    throw std::invalid_argument("pmp_residuals: shape mismatch");
  }
  PmpResiduals out;
  const std::size_t n = u.size();
  Vector h_gap(n);
  Vector h_star(n);
  Vector u_gap(n);
  Vector feedback(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = switching[k];
    const double omega = hamiltonian_minimiser(c, w, u.bounds);
    feedback[k] = omega;
    u_gap[k] = u.values[k] - omega;
    h_star[k] = hamiltonian(omega, c, w);
    h_gap[k] = hamiltonian(u.values[k], c, w) - h_star[k];
  }
  out.s = ratio_or_zero(l2_norm(h_gap, tgrid.dt), l2_norm(h_star, tgrid.dt));
  if (w > 0.0) {
    out.r = ratio_or_zero(l2_norm(u_gap, tgrid.dt), l2_norm(feedback, tgrid.dt));
    out.feedback = std::move(feedback);
  }
  return out;
}

PmpResiduals pmp_residuals(const Control& u, const Trajectory& traj, const AdjointTrajectory& adj,
                           const CostConfig& cc, const KernelMatrices& mats, const Grid& grid,
                           const TimeGrid& tgrid) {
  const Vector c = switching_function(traj, adj, mats, grid, tgrid);
  return pmp_residuals(u, c, cc.w, tgrid);
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::MaxIterations:
      return "max_iterations";
    case Termination::LineSearchStalled:
      return "line_search_stalled";
  }
  return "unknown";
}

bool bitwise_equal(const RunRecord& a, const RunRecord& b) {
  if (a.iterations.size() != b.iterations.size() || a.updates != b.updates ||
      a.reason != b.reason) {
    return false;
  }
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    const auto& x = a.iterations[i];
    const auto& y = b.iterations[i];
    if (x.iter != y.iter || x.backtracks != y.backtracks || !same_bits(x.cost, y.cost) ||
        !same_bits(x.proj_residual, y.proj_residual) || !same_bits(x.r, y.r) ||
        !same_bits(x.s, y.s) || !same_bits(x.eta, y.eta)) {
      return false;
    }
  }
  return same_bits(a.control.values, b.control.values) &&
         same_bits(a.terminal_density, b.terminal_density) &&
         same_bits(a.total_cost, b.total_cost) && same_bits(a.terminal_cost, b.terminal_cost);
}

RunRecord pgd_run(const Problem& problem, const Control& u0, const OptimizerConfig& cfg,
                  const IterationObserver& observer) {
  cfg.validate();
  u0.bounds.validate();
  if (u0.size() != problem.time.n_steps) {
    throw std::invalid_argument("pgd_run: control length does not match the time grid");
  }
  if (!u0.admissible()) {
    throw std::invalid_argument("pgd_run: initial control is not admissible");
  }

  const double dt = problem.time.dt;
  const CostOracle oracle = [&problem](const Control& c) { return problem.cost_of(c.values); };

  RunRecord run;
  Control u = u0;
  Trajectory traj = problem.solve(u);
  double cost = discrete_cost(u, traj, problem.cost, problem.grid, problem.time);

  for (int iter = 0;; ++iter) {
    const AdjointTrajectory adj = problem.solve_adjoint(u, traj);
    const Vector switching =
        switching_function(traj, adj, problem.kernels, problem.grid, problem.time);
    Vector g = switching;
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] += problem.cost.w * (u.values[k] - 1.0);
    }
    const PmpResiduals pmp = pmp_residuals(u, switching, problem.cost.w, problem.time);

    IterationRecord rec;
    rec.iter = iter;
    rec.cost = cost;
    rec.proj_residual = l2_norm(gradient_mapping(u, g, 1.0), dt);
    rec.r = pmp.r.value_or(std::numeric_limits<double>::quiet_NaN());
    rec.s = pmp.s;

    auto record = [&] {
      run.iterations.push_back(rec);
      if (observer) observer(rec, u, g);
    };
    if (rec.proj_residual <= cfg.eps) {
      record();
      run.reason = Termination::Converged;
      break;
    }
    if (run.updates >= cfg.max_iter) {
      record();
      run.reason = Termination::MaxIterations;
      break;
    }
    try {
      ArmijoResult step = armijo_step(u, g, cost, cfg, dt, oracle);
      rec.eta = step.eta;
      rec.backtracks = step.backtracks;
      record();
      u = std::move(step.next);
      cost = step.cost;
      ++run.updates;
      traj = problem.solve(u);
    } catch (const LineSearchStalled& stall) {
      rec.backtracks = stall.backtracks();
      record();
      run.reason = Termination::LineSearchStalled;
      break;
    }
  }

  run.total_cost = cost;
  run.terminal_cost = terminal_cost(traj.terminal(), problem.cost.terminal, problem.grid);
  run.terminal_density = traj.terminal();
  run.control = std::move(u);
  return run;
}

}  // namespace cfopt
