#pragma once

#include <span>
#include <vector>

#include "cfopt/dynamics.hpp"
#include "cfopt/grid.hpp"
#include "cfopt/kernels.hpp"

namespace cfopt {

/// psi(f) = sign * (number of particles with size in [x_lo, x_hi]).
struct TerminalCost {
  double sign = 1.0;
  double x_lo = 0.0;
  double x_hi = 5.0;

  void validate(const Grid& grid) const;
};

/// J(u) = (w / 2) int (u - 1)^2 dt + psi(f_u(T))
struct CostConfig {
  double w = 1.0;
  TerminalCost terminal;

  void validate(const Grid& grid) const;
};

struct AdjointTrajectory {
  std::vector<Vector> values;  // n_steps + 1 nodes; values.back() == D psi
};

/// D psi: sign on window cells, zero elsewhere. Throws if no cell center
/// falls inside the window.
Vector terminal_gradient(const TerminalCost& tc, const Grid& grid);

/// Exact transpose (w.r.t. <.,.>_dx) of g -> DC[f] g:
///   sum_j K_ij f_j (Phi_{i+j} - phi_j - phi_i) dx,
/// where Phi_s pulls phi back through the gain pairing map (zero off-grid).
Vector coagulation_adjoint(std::span<const double> phi, std::span<const double> f,
                           const KernelMatrices& mats, const Grid& grid);

/// Exact transpose of apply_F.
Vector fragmentation_adjoint(std::span<const double> phi, const KernelMatrices& mats,
                             const Grid& grid);

/// Time derivative of the adjoint, -(u DC[f]* phi + F* phi).
Vector apply_adjoint_rhs(std::span<const double> phi, std::span<const double> f, double u_val,
                         const KernelMatrices& mats, const Grid& grid);

/// phi_N = D psi; phi_k = phi_{k+1} + dt (u_k DC[f_{k+1}]* phi_{k+1} + F* phi_{k+1}).
AdjointTrajectory backward_solve(const Control& u, const Trajectory& traj, const CostConfig& cc,
                                 const KernelMatrices& mats, const Grid& grid,
                                 const TimeGrid& tgrid);

double running_cost(std::span<const double> u, double w, const TimeGrid& tgrid);
double terminal_cost(std::span<const double> f_final, const TerminalCost& tc, const Grid& grid);

double discrete_cost(const Control& u, const Trajectory& traj, const CostConfig& cc,
                     const Grid& grid, const TimeGrid& tgrid);

/// g_k = w (u_k - 1) + <phi_k, C f_k>_dx, a time density.
Vector reduced_gradient(const Control& u, const Trajectory& traj, const AdjointTrajectory& adj,
                        const CostConfig& cc, const KernelMatrices& mats, const Grid& grid,
                        const TimeGrid& tgrid);

/// <phi_k, C f_k>_dx for every node k < n_steps. The dynamic part of the gradient.
Vector switching_function(const Trajectory& traj, const AdjointTrajectory& adj,
                          const KernelMatrices& mats, const Grid& grid, const TimeGrid& tgrid);

}  // namespace cfopt
