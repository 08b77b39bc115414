#pragma once

#include <cstddef>
#include <span>

#include "cfopt/matrix.hpp"

namespace cfopt {

/// Uniform cell-centred finite-volume grid on [0, domain_max].
/// Cell i covers [i*dx, (i+1)*dx] and has center (i + 1/2)*dx.
struct Grid {
  std::size_t n_cells = 0;
  double domain_max = 0.0;
  double dx = 0.0;
  Vector centers;

  [[nodiscard]] double lower_edge(std::size_t i) const noexcept { return static_cast<double>(i) * dx; }
  [[nodiscard]] double upper_edge(std::size_t i) const noexcept { return static_cast<double>(i + 1) * dx; }
};

/// Uniform time grid; n_steps * dt == t_final.
struct TimeGrid {
  double t_final = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;

  [[nodiscard]] double node(std::size_t k) const noexcept { return static_cast<double>(k) * dt; }
};

Grid make_grid(std::size_t n_cells, double domain_max);

/// Builds a time grid with n_steps = round(t_final / dt). The requested dt must
/// divide t_final to within 1e-9 relative; the stored dt is t_final / n_steps.
TimeGrid make_time_grid(double t_final, double dt);

/// Same grid with the time step halved / doubled.
TimeGrid refine(const TimeGrid& tgrid);
TimeGrid coarsen(const TimeGrid& tgrid);

/// sum_i phi[i] * f[i] * dx
double inner_product(std::span<const double> phi, std::span<const double> f, const Grid& grid);

/// k = 0: particle number, k = 1: mass.
double moment(std::span<const double> f, int k, const Grid& grid);

/// Number of particles in cells whose center lies in [x_lo, x_hi].
double window_mass(std::span<const double> f, double x_lo, double x_hi, const Grid& grid);

/// Weighted L1 norm sum_i (1 + x_i) |f_i| dx.
double weighted_l1_norm(std::span<const double> f, const Grid& grid);

}  // namespace cfopt
