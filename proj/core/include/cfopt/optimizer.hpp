#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cfopt/dynamics.hpp"
#include "cfopt/problem.hpp"

namespace cfopt {

struct OptimizerConfig {
  double eta0 = 0.1;
  double beta = 0.5;
  double sigma = 1e-4;
  double eps = 0.075;
  int max_iter = 200;
  int max_backtracks = 40;

  void validate() const;
};

/// Discrete L2(0, T) norm, sqrt(sum v_k^2 dt).
double l2_norm(std::span<const double> v, double dt);

/// Pointwise clamp onto [u_min, u_max].
Control project_control(std::span<const double> u_raw, double u_min, double u_max);

/// G_eta(u) = (u - P(u - eta g)) / eta
Vector gradient_mapping(const Control& u, std::span<const double> g, double eta);

struct ArmijoResult {
  Control next;
  double eta = 0.0;
  double cost = 0.0;
  int backtracks = 0;
};

using CostOracle = std::function<double(const Control&)>;

/// Scans eta = eta0, eta0 beta, ... and returns the first projected step with
/// J(u+) <= J(u) - sigma eta ||G_eta(u)||^2. Non-finite trial costs (and solver
/// failures inside the oracle) count as rejections. Throws LineSearchStalled
/// once max_backtracks reductions have been tried.
ArmijoResult armijo_step(const Control& u, std::span<const double> g, double cost_u,
                         const OptimizerConfig& cfg, double dt, const CostOracle& cost_oracle);

/// Minimiser over [u_min, u_max] of H(omega) = (w/2)(omega - 1)^2 + omega c.
double hamiltonian_minimiser(double c, double w, const ControlBounds& bounds);
double hamiltonian(double omega, double c, double w);

struct PmpResiduals {
  std::optional<double> r;  // undefined for w == 0
  double s = 0.0;
  Vector feedback;          // u*_k (empty when w == 0)
};

/// Relative distance of u to the pointwise feedback law and of H(u) to the
/// pointwise Hamiltonian minimum, given c_k = <phi_k, C f_k>.
PmpResiduals pmp_residuals(const Control& u, std::span<const double> switching, double w,
                           const TimeGrid& tgrid);

PmpResiduals pmp_residuals(const Control& u, const Trajectory& traj, const AdjointTrajectory& adj,
                           const CostConfig& cc, const KernelMatrices& mats, const Grid& grid,
                           const TimeGrid& tgrid);

enum class Termination { Converged, MaxIterations, LineSearchStalled };

std::string_view to_string(Termination t);

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double proj_residual = 0.0;
  double r = 0.0;  // NaN when w == 0
  double s = 0.0;
  double eta = 0.0;  // step accepted from this iterate; 0 on the final one
  int backtracks = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunRecord {
  std::vector<IterationRecord> iterations;
  Control control;
  Vector terminal_density;
  int updates = 0;
  Termination reason = Termination::Converged;
  double total_cost = 0.0;
  double terminal_cost = 0.0;
};

bool bitwise_equal(const RunRecord& a, const RunRecord& b);

/// Called once per iterate with its record, the iterate and its gradient.
using IterationObserver =
    std::function<void(const IterationRecord&, const Control&, std::span<const double>)>;

/// Projected gradient descent with Armijo backtracking. Stops when
/// ||u - P(u - g)||_2 <= eps, after max_iter updates, or on a stalled line search.
RunRecord pgd_run(const Problem& problem, const Control& u0, const OptimizerConfig& cfg,
                  const IterationObserver& observer = {});

}  // namespace cfopt
