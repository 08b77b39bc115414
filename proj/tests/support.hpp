#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "cfopt/grid.hpp"
#include "cfopt/kernels.hpp"
#include "cfopt/problem.hpp"
#include "cfopt/rng.hpp"

namespace cfopt::test {

inline Vector random_vector(SplitMix64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline double max_abs(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// The reference kernels with the test-case parameters.
inline KernelSet reference_kernels() { return KernelSet{}; }

inline KernelSet no_dynamics() {
  KernelSet k;
  k.coagulation.k0 = 0.0;
  k.fragmentation.alpha0 = 0.0;
  return k;
}

/// A reference-shaped problem with a configurable resolution.
inline Problem make_problem(std::size_t n_cells = 800, double dt = 0.005,
                            const KernelSet& kset = reference_kernels(), double w = 1.0,
                            ControlBounds bounds = {0.1, 3.0},
                            GainPairing pairing = GainPairing::Split) {
  Problem p;
  p.grid = make_grid(n_cells, 25.0);
  p.time = make_time_grid(1.0, dt);
  p.kernels = precompute(kset, p.grid, pairing);
  p.initial = GaussianInitial{}.sample(p.grid);
  p.cost = CostConfig{w, TerminalCost{}};
  p.bounds = bounds;
  return p;
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cfopt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cfopt::test
