#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cfopt/grid.hpp"
#include "cfopt/kernels.hpp"

namespace cfopt {

/// Admissible control box, 0 < u_min <= 1 <= u_max.
struct ControlBounds {
  double u_min = 0.1;
  double u_max = 2.0;

  void validate() const;
};

/// Piecewise-constant control, values[k] acting on [t_k, t_{k+1}).
struct Control {
  Vector values;
  ControlBounds bounds;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] bool admissible() const noexcept;

  static Control constant(std::size_t n_steps, double value, ControlBounds bounds);
};

struct Trajectory {
  std::vector<Vector> states;  // n_steps + 1 nodes
  double min_value = 0.0;      // running minimum entry over all nodes
  std::size_t min_step = 0;    // node where it was attained
  double mass_defect = 0.0;    // |M1(f(T)) - M1(f_in)| / M1(f_in)

  [[nodiscard]] const Vector& terminal() const { return states.back(); }
};

/// Coagulation operator C f = C_g f + C_l f on the grid.
///   loss_i = -f_i sum_j K_ij f_j dx
///   gain   = half of sum over ordered pairs K_jl f_j f_l dx, routed by the
///            pairing map; out-of-grid targets are dropped.
Vector apply_C(std::span<const double> f, const KernelMatrices& mats, const Grid& grid);

/// Fragmentation operator (F f)_i = -alpha_i f_i + sum_j G_ij alpha_j f_j.
Vector apply_F(std::span<const double> f, const KernelMatrices& mats, const Grid& grid);

/// Pair sums P_s = 1/2 sum_{j + l = s} K_jl f_j f_l dx, s = 0..2n-2.
/// Shared by apply_C and the reduced-gradient pairing.
Vector coagulation_pair_sums(std::span<const double> f, const KernelMatrices& mats,
                             const Grid& grid);

/// Forward Euler for f' = u C f + F f. Throws SolverError on non-finite values.
Trajectory forward_solve(std::span<const double> f_in, const Control& u,
                         const KernelMatrices& mats, const Grid& grid, const TimeGrid& tgrid);

/// Only the terminal state; does not keep the trajectory in memory.
Vector forward_terminal(std::span<const double> f_in, std::span<const double> u,
                        const KernelMatrices& mats, const Grid& grid, const TimeGrid& tgrid);

/// f_in(x) = A exp(-(x - c)^2 / s) 1{x <= support}, sampled at cell centers.
struct GaussianInitial {
  double amplitude = 2.0;
  double center = 7.5;
  double width = 50.0;
  double support = 25.0;

  [[nodiscard]] Vector sample(const Grid& grid) const;
};

}  // namespace cfopt
