#include "cfopt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cfopt/errors.hpp"

namespace cfopt {

namespace {

void require_state(std::span<const double> f, const KernelMatrices& mats, const Grid& grid,
                   const char* who) {
  if (mats.n != grid.n_cells || f.size() != grid.n_cells) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch (state " +
                                std::to_string(f.size()) + ", grid " +
                                std::to_string(grid.n_cells) + ", kernels " +
                                std::to_string(mats.n) + ")");
  }
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      return false;
    }
  }
  return true;
}

// y += dt * (u * C f + F f), in place.
void euler_update(Vector& f, double u, double dt, const KernelMatrices& mats, const Grid& grid) {
  const Vector c = apply_C(f, mats, grid);
  const Vector r = apply_F(f, mats, grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] += dt * (u * c[i] + r[i]);
  }
}

}  // namespace

void ControlBounds::validate() const {
  if (!(u_min > 0.0) || !(u_min <= 1.0) || !(u_max >= 1.0) || !std::isfinite(u_max)) {
    throw std::invalid_argument("control bounds must satisfy 0 < u_min <= 1 <= u_max < inf");
  }
}

bool Control::admissible() const noexcept {
  for (double v : values) {
    if (!(v >= bounds.u_min && v <= bounds.u_max)) {
      return false;
    }
  }
  return true;
}

Control Control::constant(std::size_t n_steps, double value, ControlBounds bounds) {
  return Control{Vector(n_steps, value), bounds};
}

Vector coagulation_pair_sums(std::span<const double> f, const KernelMatrices& mats,
                             const Grid& grid) {
  require_state(f, mats, grid, "coagulation_pair_sums");
  const std::size_t n = grid.n_cells;
  Vector pairs(2 * n - 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double fj = f[j];
    if (fj == 0.0) {
      continue;
    }
    const auto row = mats.coagulation.row(j);
    pairs[2 * j] += 0.5 * row[j] * fj * fj;
    double* out = pairs.data() + j;
    for (std::size_t l = j + 1; l < n; ++l) {
      out[l] += fj * row[l] * f[l];
    }
  }
  for (double& p : pairs) {
    p *= grid.dx;
  }
  return pairs;
}

Vector apply_C(std::span<const double> f, const KernelMatrices& mats, const Grid& grid) {
  const Vector pairs = coagulation_pair_sums(f, mats, grid);
  const std::size_t n = grid.n_cells;
  Vector out(n, 0.0);
  switch (mats.pairing) {
    case GainPairing::RoundUp:
      for (std::size_t i = 1; i < n; ++i) out[i] = pairs[i - 1];
      break;
    case GainPairing::RoundDown:
      for (std::size_t i = 0; i < n; ++i) out[i] = pairs[i];
      break;
    case GainPairing::Split:
      out[0] = 0.5 * pairs[0];
      for (std::size_t i = 1; i < n; ++i) out[i] = 0.5 * (pairs[i] + pairs[i - 1]);
      break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = mats.coagulation.row(i);
    double kf = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      kf += row[j] * f[j];
    }
    out[i] -= f[i] * kf * grid.dx;
  }
  return out;
}

Vector apply_F(std::span<const double> f, const KernelMatrices& mats, const Grid& grid) {
  require_state(f, mats, grid, "apply_F");
  const std::size_t n = grid.n_cells;
  Vector broken(n);
  for (std::size_t j = 0; j < n; ++j) {
    broken[j] = mats.rate[j] * f[j];
  }
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = mats.fragment_gain.row(i);
    double gain = 0.0;
    // fragment_gain is upper triangular: daughters are smaller than parents.
    for (std::size_t j = i; j < n; ++j) {
      gain += row[j] * broken[j];
    }
    out[i] = gain - broken[i];
  }
  return out;
}

Trajectory forward_solve(std::span<const double> f_in, const Control& u,
                         const KernelMatrices& mats, const Grid& grid, const TimeGrid& tgrid) {
  require_state(f_in, mats, grid, "forward_solve");
  if (u.size() != tgrid.n_steps) {
    throw std::invalid_argument("forward_solve: control length " + std::to_string(u.size()) +
                                " != n_steps " + std::to_string(tgrid.n_steps));
  }
  if (!all_finite(f_in)) {
    throw std::invalid_argument("forward_solve: initial condition is not finite");
  }
  Trajectory traj;
  traj.states.reserve(tgrid.n_steps + 1);
  traj.states.emplace_back(f_in.begin(), f_in.end());
  traj.min_value = *std::min_element(f_in.begin(), f_in.end());
  traj.min_step = 0;

  Vector f(f_in.begin(), f_in.end());
  for (std::size_t k = 0; k < tgrid.n_steps; ++k) {
    euler_update(f, u.values[k], tgrid.dt, mats, grid);
    if (!all_finite(f)) {
      throw SolverError("forward_solve: non-finite state", k);
    }
    const double lowest = *std::min_element(f.begin(), f.end());
    if (lowest < traj.min_value) {
      traj.min_value = lowest;
      traj.min_step = k + 1;
    }
    traj.states.push_back(f);
  }

  const double m_in = moment(f_in, 1, grid);
  const double m_out = moment(f, 1, grid);
  traj.mass_defect = m_in != 0.0 ? std::abs(m_out - m_in) / std::abs(m_in) : std::abs(m_out);
  return traj;
}

Vector forward_terminal(std::span<const double> f_in, std::span<const double> u,
                        const KernelMatrices& mats, const Grid& grid, const TimeGrid& tgrid) {
  require_state(f_in, mats, grid, "forward_terminal");
  if (u.size() != tgrid.n_steps) {
    throw std::invalid_argument("forward_terminal: control length mismatch");
  }
  Vector f(f_in.begin(), f_in.end());
  for (std::size_t k = 0; k < tgrid.n_steps; ++k) {
    euler_update(f, u[k], tgrid.dt, mats, grid);
    if (!all_finite(f)) {
      throw SolverError("forward_terminal: non-finite state", k);
    }
  }
  return f;
}

Vector GaussianInitial::sample(const Grid& grid) const {
  Vector f(grid.n_cells, 0.0);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double x = grid.centers[i];
    if (x <= support) {
      const double d = x - center;
      f[i] = amplitude * std::exp(-d * d / width);
    }
  }
  return f;
}

}  // namespace cfopt
