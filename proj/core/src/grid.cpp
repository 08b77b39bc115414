#include "cfopt/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cfopt {

namespace {

void require_length(std::span<const double> v, const Grid& grid, const char* name) {
  if (v.size() != grid.n_cells) {
    throw std::invalid_argument(std::string(name) + ": length " + std::to_string(v.size()) +
                                " does not match grid size " + std::to_string(grid.n_cells));
  }
}

}  // namespace

Grid make_grid(std::size_t n_cells, double domain_max) {
  if (n_cells < 2) {
    throw std::invalid_argument("make_grid: n_cells must be >= 2");
  }
  if (!(domain_max > 0.0) || !std::isfinite(domain_max)) {
    throw std::invalid_argument("make_grid: domain_max must be positive and finite");
  }
  Grid grid;
  grid.n_cells = n_cells;
  grid.domain_max = domain_max;
  grid.dx = domain_max / static_cast<double>(n_cells);
  grid.centers.resize(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) {
    grid.centers[i] = (static_cast<double>(i) + 0.5) * grid.dx;
  }
  return grid;
}

TimeGrid make_time_grid(double t_final, double dt) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("make_time_grid: t_final must be positive and finite");
  }
  if (!(dt > 0.0) || dt > t_final) {
    throw std::invalid_argument("make_time_grid: dt must lie in (0, t_final]");
  }
  const double ratio = t_final / dt;
  const double steps = std::round(ratio);
  if (std::abs(steps - ratio) > 1e-9 * ratio) {
    throw std::invalid_argument("make_time_grid: dt does not divide t_final");
  }
  TimeGrid tgrid;
  tgrid.t_final = t_final;
  tgrid.n_steps = static_cast<std::size_t>(steps);
  tgrid.dt = t_final / steps;
  return tgrid;
}

TimeGrid refine(const TimeGrid& tgrid) {
  TimeGrid out = tgrid;
  out.n_steps = 2 * tgrid.n_steps;
  out.dt = tgrid.t_final / static_cast<double>(out.n_steps);
  return out;
}

TimeGrid coarsen(const TimeGrid& tgrid) {
  if (tgrid.n_steps % 2 != 0) {
    throw std::invalid_argument("coarsen: n_steps must be even");
  }
  TimeGrid out = tgrid;
  out.n_steps = tgrid.n_steps / 2;
  out.dt = tgrid.t_final / static_cast<double>(out.n_steps);
  return out;
}

double inner_product(std::span<const double> phi, std::span<const double> f, const Grid& grid) {
  require_length(phi, grid, "inner_product(phi)");
  require_length(f, grid, "inner_product(f)");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    acc += phi[i] * f[i];
  }
  return acc * grid.dx;
}

double moment(std::span<const double> f, int k, const Grid& grid) {
  require_length(f, grid, "moment");
  if (k != 0 && k != 1) {
    throw std::invalid_argument("moment: k must be 0 or 1");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    acc += (k == 0 ? 1.0 : grid.centers[i]) * f[i];
  }
  return acc * grid.dx;
}

double window_mass(std::span<const double> f, double x_lo, double x_hi, const Grid& grid) {
  require_length(f, grid, "window_mass");
  if (!(x_lo <= x_hi)) {
    throw std::invalid_argument("window_mass: x_lo must not exceed x_hi");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double x = grid.centers[i];
    if (x >= x_lo && x <= x_hi) {
      acc += f[i];
    }
  }
  return acc * grid.dx;
}

double weighted_l1_norm(std::span<const double> f, const Grid& grid) {
  require_length(f, grid, "weighted_l1_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    acc += (1.0 + grid.centers[i]) * std::abs(f[i]);
  }
  return acc * grid.dx;
}

}  // namespace cfopt
