#pragma once

#include <optional>

#include "cfopt/grid.hpp"
#include "cfopt/matrix.hpp"

namespace cfopt {

/// K(x, y) = k0 (1 + x)^mu (1 + y)^mu 1{x + y <= sum_cutoff}
struct CoagulationKernel {
  double k0 = 0.05;
  double mu = 0.25;
  std::optional<double> sum_cutoff = 25.0;

  [[nodiscard]] double operator()(double x, double y) const;
};

/// alpha(y) = alpha0 y^lambda 1{y <= trunc_level}
/// b(x, y)  = (2 + nu) / y (x / y)^nu 1{0 < x < y}
struct FragmentationLaw {
  double alpha0 = 0.2;
  double lambda = 0.5;
  double nu = 0.0;
  std::optional<double> trunc_level;

  [[nodiscard]] double rate(double y) const;
  [[nodiscard]] double daughter(double x, double y) const;
};

struct KernelSet {
  CoagulationKernel coagulation;
  FragmentationLaw fragmentation;
  /// Optional user-supplied K(x_i, x_j) table; replaces the parametric kernel
  /// in precompute(). Must be square, symmetric and non-negative.
  std::optional<Matrix> tabulated_coagulation;
};

/// Throws std::invalid_argument on out-of-range parameters.
void validate(const KernelSet& kset);

struct KernelValues {
  double coagulation = 0.0;    // K(x, y)
  double rate = 0.0;           // alpha(y)
  double daughter = 0.0;       // b(x, y)
};

KernelValues eval_kernels(const KernelSet& kset, double x, double y);

/// Expected number of fragments per break-up, (nu + 2) / (nu + 1).
double fragment_count(const FragmentationLaw& law);

/// alpha_n = 1{x <= level} alpha, K_n = K 1{x + y <= level}. Composes with any
/// cutoff already present (the tighter one wins).
KernelSet truncate(const KernelSet& kset, double level);

/// Target cell(s) for the coagulation gain of the pair (j, l). The pair sum
/// x_j + x_l = (j + l + 1) dx sits on the edge between cells j + l and j + l + 1.
enum class GainPairing {
  RoundUp,    // all of it to j + l + 1
  RoundDown,  // all of it to j + l
  Split,      // half to each neighbour; conserves mass exactly on the lattice
};

struct KernelMatrices {
  std::size_t n = 0;
  GainPairing pairing = GainPairing::Split;
  Matrix coagulation;   // K(x_i, x_j), zero for inactive pairs
  Vector rate;          // alpha(x_i)
  Matrix daughter_number;  // int_{cell_i cap (0, x_j)} b(x, x_j) dx
  Matrix daughter_mass;    // int_{cell_i cap (0, x_j)} x b(x, x_j) dx
  /// Fragmentation gain weights used by the operator: daughter_mass / x_i, so
  /// that mass redistribution is exact with center-weighted moments.
  Matrix fragment_gain;
};

/// Tabulates the kernel set on the grid. Daughter-law cell integrals use the
/// closed-form antiderivative of the power law, which also integrates the
/// x^nu singularity at the origin exactly.
/// On the grid, a coagulation pair is active iff x_i + x_j lies strictly below
/// the cutoff, so pairs whose sum sits on the cutoff edge never produce
/// out-of-grid gain.
KernelMatrices precompute(const KernelSet& kset, const Grid& grid,
                          GainPairing pairing = GainPairing::Split);

}  // namespace cfopt
