#pragma once

#include <span>

#include "cfopt/adjoint.hpp"
#include "cfopt/dynamics.hpp"
#include "cfopt/grid.hpp"
#include "cfopt/kernels.hpp"

namespace cfopt {

/// Everything needed to evaluate J(u) and its gradient for one discretised
/// optimal-control problem. Immutable once built; share freely across threads.
struct Problem {
  Grid grid;
  TimeGrid time;
  KernelMatrices kernels;
  Vector initial;
  CostConfig cost;
  ControlBounds bounds;

  [[nodiscard]] Control constant_control(double value) const {
    return Control::constant(time.n_steps, value, bounds);
  }
  [[nodiscard]] Trajectory solve(const Control& u) const {
    return forward_solve(initial, u, kernels, grid, time);
  }
  [[nodiscard]] AdjointTrajectory solve_adjoint(const Control& u, const Trajectory& traj) const {
    return backward_solve(u, traj, cost, kernels, grid, time);
  }
  /// J(u) for arbitrary (possibly inadmissible) control values.
  [[nodiscard]] double cost_of(std::span<const double> u) const {
    const Vector f_final = forward_terminal(initial, u, kernels, grid, time);
    return running_cost(u, cost.w, time) + terminal_cost(f_final, cost.terminal, grid);
  }
  [[nodiscard]] double terminal_of(std::span<const double> u) const {
    return terminal_cost(forward_terminal(initial, u, kernels, grid, time), cost.terminal, grid);
  }
  /// Adjoint reduced gradient (time density) at u.
  [[nodiscard]] Vector gradient_of(const Control& u) const {
    const Trajectory traj = solve(u);
    const AdjointTrajectory adj = solve_adjoint(u, traj);
    return reduced_gradient(u, traj, adj, cost, kernels, grid, time);
  }

  /// Same problem on another time grid.
  [[nodiscard]] Problem with_time(const TimeGrid& tgrid) const {
    Problem p = *this;
    p.time = tgrid;
    return p;
  }
  [[nodiscard]] Problem with_weight(double w) const {
    Problem p = *this;
    p.cost.w = w;
    return p;
  }
};

}  // namespace cfopt
