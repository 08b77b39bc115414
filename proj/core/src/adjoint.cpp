#include "cfopt/adjoint.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cfopt/errors.hpp"

namespace cfopt {

namespace {

void require_size(std::size_t got, std::size_t want, const char* who) {
  if (got != want) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch (" + std::to_string(got) +
                                " vs " + std::to_string(want) + ")");
  }
}

// Phi_s = sum_i P(s -> i) phi_i for s = 0..2n-2.
Vector pull_back_through_pairing(std::span<const double> phi, GainPairing pairing) {
  const std::size_t n = phi.size();
  Vector out(2 * n - 1, 0.0);
  auto at = [&](std::size_t i) { return i < n ? phi[i] : 0.0; };
  for (std::size_t s = 0; s < out.size(); ++s) {
    switch (pairing) {
      case GainPairing::RoundUp:
        out[s] = at(s + 1);
        break;
      case GainPairing::RoundDown:
        out[s] = at(s);
        break;
      case GainPairing::Split:
        out[s] = 0.5 * (at(s) + at(s + 1));
        break;
    }
  }
  return out;
}

}  // namespace

void TerminalCost::validate(const Grid& grid) const {
  if (sign != 1.0 && sign != -1.0) {
    throw std::invalid_argument("cost.sign must be +1 or -1");
  }
  if (!(x_lo >= 0.0 && x_lo < x_hi && x_hi <= grid.domain_max)) {
    throw std::invalid_argument("cost window must satisfy 0 <= x_lo < x_hi <= domain_max");
  }
}

void CostConfig::validate(const Grid& grid) const {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("cost.w must be finite and >= 0");
  }
  terminal.validate(grid);
}

Vector terminal_gradient(const TerminalCost& tc, const Grid& grid) {
  tc.validate(grid);
  Vector d(grid.n_cells, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double x = grid.centers[i];
    if (x >= tc.x_lo && x <= tc.x_hi) {
      d[i] = tc.sign;
      any = true;
    }
  }
  if (!any) {
    throw std::invalid_argument("terminal_gradient: window contains no cell center");
  }
  return d;
}

Vector coagulation_adjoint(std::span<const double> phi, std::span<const double> f,
                           const KernelMatrices& mats, const Grid& grid) {
  const std::size_t n = grid.n_cells;
  require_size(phi.size(), n, "coagulation_adjoint(phi)");
  require_size(f.size(), n, "coagulation_adjoint(f)");
  require_size(mats.n, n, "coagulation_adjoint(kernels)");

  const Vector pulled = pull_back_through_pairing(phi, mats.pairing);
  Vector phi_f(n);
  for (std::size_t j = 0; j < n; ++j) {
    phi_f[j] = phi[j] * f[j];
  }
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = mats.coagulation.row(i);
    const double* shifted = pulled.data() + i;
    double gain = 0.0;
    double kf = 0.0;
    double kphif = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      gain += row[j] * f[j] * shifted[j];
      kf += row[j] * f[j];
      kphif += row[j] * phi_f[j];
    }
    out[i] = (gain - phi[i] * kf - kphif) * grid.dx;
  }
  return out;
}

Vector fragmentation_adjoint(std::span<const double> phi, const KernelMatrices& mats,
                             const Grid& grid) {
  const std::size_t n = grid.n_cells;
  require_size(phi.size(), n, "fragmentation_adjoint");
  require_size(mats.n, n, "fragmentation_adjoint(kernels)");
  Vector pulled(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = mats.fragment_gain.row(i);
    for (std::size_t j = i; j < n; ++j) {
      pulled[j] += row[j] * phi[i];
    }
  }
  Vector out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = mats.rate[j] * (pulled[j] - phi[j]);
  }
  return out;
}

Vector apply_adjoint_rhs(std::span<const double> phi, std::span<const double> f, double u_val,
                         const KernelMatrices& mats, const Grid& grid) {
  const Vector dc = coagulation_adjoint(phi, f, mats, grid);
  const Vector df = fragmentation_adjoint(phi, mats, grid);
  Vector out(phi.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = -(u_val * dc[i] + df[i]);
  }
  return out;
}

AdjointTrajectory backward_solve(const Control& u, const Trajectory& traj, const CostConfig& cc,
                                 const KernelMatrices& mats, const Grid& grid,
                                 const TimeGrid& tgrid) {
  require_size(u.size(), tgrid.n_steps, "backward_solve(control)");
  require_size(traj.states.size(), tgrid.n_steps + 1, "backward_solve(trajectory)");

  AdjointTrajectory adj;
  adj.values.resize(tgrid.n_steps + 1);
  adj.values[tgrid.n_steps] = terminal_gradient(cc.terminal, grid);
  for (std::size_t k = tgrid.n_steps; k-- > 0;) {
    const Vector& next = adj.values[k + 1];
    const Vector rhs = apply_adjoint_rhs(next, traj.states[k + 1], u.values[k], mats, grid);
    Vector phi(next.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi[i] = next[i] - tgrid.dt * rhs[i];
      if (!std::isfinite(phi[i])) {
        throw SolverError("backward_solve: non-finite adjoint", k);
      }
    }
    adj.values[k] = std::move(phi);
  }
  return adj;
}

double running_cost(std::span<const double> u, double w, const TimeGrid& tgrid) {
  require_size(u.size(), tgrid.n_steps, "running_cost");
  double acc = 0.0;
  for (double v : u) {
    acc += (v - 1.0) * (v - 1.0);
  }
  return 0.5 * w * acc * tgrid.dt;
}

double terminal_cost(std::span<const double> f_final, const TerminalCost& tc, const Grid& grid) {
  return tc.sign * window_mass(f_final, tc.x_lo, tc.x_hi, grid);
}

double discrete_cost(const Control& u, const Trajectory& traj, const CostConfig& cc,
                     const Grid& grid, const TimeGrid& tgrid) {
  require_size(traj.states.size(), tgrid.n_steps + 1, "discrete_cost(trajectory)");
  return running_cost(u.values, cc.w, tgrid) + terminal_cost(traj.terminal(), cc.terminal, grid);
}

Vector switching_function(const Trajectory& traj, const AdjointTrajectory& adj,
                          const KernelMatrices& mats, const Grid& grid, const TimeGrid& tgrid) {
  require_size(traj.states.size(), tgrid.n_steps + 1, "switching_function(trajectory)");
  require_size(adj.values.size(), tgrid.n_steps + 1, "switching_function(adjoint)");
  Vector out(tgrid.n_steps);
  for (std::size_t k = 0; k < tgrid.n_steps; ++k) {
    out[k] = inner_product(adj.values[k], apply_C(traj.states[k], mats, grid), grid);
  }
  return out;
}

Vector reduced_gradient(const Control& u, const Trajectory& traj, const AdjointTrajectory& adj,
                        const CostConfig& cc, const KernelMatrices& mats, const Grid& grid,
                        const TimeGrid& tgrid) {
  require_size(u.size(), tgrid.n_steps, "reduced_gradient(control)");
  Vector g = switching_function(traj, adj, mats, grid, tgrid);
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] += cc.w * (u.values[k] - 1.0);
  }
  return g;
}

}  // namespace cfopt
