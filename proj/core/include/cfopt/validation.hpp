#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cfopt/kernels.hpp"
#include "cfopt/optimizer.hpp"
#include "cfopt/problem.hpp"

namespace cfopt {

/// Central finite differences of the fully discrete cost, one control node at
/// a time, divided by dt so the result is a time density like
/// reduced_gradient. Step h_k = h_rel * max(1, |u_k|). Costs 2 n_steps forward
/// solves; threads = 0 uses hardware concurrency.
Vector fd_gradient(const Problem& problem, const Control& u, double h_rel = 1e-5,
                   unsigned threads = 0);

/// Exact gradient of the fully discrete cost (reverse sweep through the
/// forward Euler recursion), dJ/du_k. Not a time density.
Vector discrete_adjoint_gradient(const Problem& problem, const Control& u);

/// Seeded direction with entries uniform on [0, 1), normalised so that
/// sum d_k^2 dt = 1.
Vector taylor_direction(std::uint64_t seed, std::size_t n_steps, double dt);

/// 1e-1, 1e-2, ..., 1e-7
Vector default_taylor_epsilons();

struct TaylorReport {
  Vector epsilons;
  Vector residuals;                    // adjoint gradient
  std::optional<Vector> residuals_fd;  // finite-difference gradient, if requested
  double plateau = 0.0;                // min residual over the trailing half of the sweep
  std::uint64_t seed = 0;
};

/// E(eps) = |J(u + eps d) - J(u) - eps <g, d>_dt| / eps.
TaylorReport taylor_residual(const Problem& problem, const Control& u, std::uint64_t seed,
                             std::span<const double> epsilons, bool with_fd = false);

enum class GradientOracle { FiniteDifference, DiscreteAdjoint };

struct MismatchReport {
  double rho = 0.0;
  Vector adjoint_scaled;  // dt * reduced_gradient
  Vector discrete;        // oracle dJ/du_k
};

/// rho = ||dt g_adjoint - g_disc||_2 / ||g_disc||_2 with unweighted vector norms.
MismatchReport gradient_mismatch(const Problem& problem, const Control& u,
                                 GradientOracle oracle = GradientOracle::FiniteDifference);

struct TruncationRow {
  double level = 0.0;
  double optimal_cost = 0.0;
  double gap = 0.0;  // |J_n* - J*|
  int iterations = 0;
  Termination reason = Termination::Converged;
};

struct TruncationStudy {
  double reference_cost = 0.0;
  int reference_iterations = 0;
  std::vector<TruncationRow> rows;
};

/// Optimises with truncate(kset, level) for every level and compares against
/// the untruncated optimum.
TruncationStudy truncation_study(const Problem& base, const KernelSet& kset,
                                 std::span<const double> levels, const OptimizerConfig& cfg);

struct LipschitzReport {
  double ratio = 0.0;
  int pairs_used = 0;
};

/// max over seeded admissible pairs of sup_t ||f_u2(t) - f_u1(t)||_{0,1} / ||u2 - u1||_2.
/// Random controls are piecewise constant on `segments` equal sub-intervals of
/// [0, T], so the same seed describes the same controls on every time grid.
LipschitzReport lipschitz_probe(const Problem& problem, int n_pairs, std::uint64_t seed,
                                int segments = 10);

}  // namespace cfopt
