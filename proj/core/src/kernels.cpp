#include "cfopt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cfopt {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) {
    throw std::invalid_argument(message);
  }
}

bool finite(double v) { return std::isfinite(v); }

std::optional<double> tighter(std::optional<double> current, double level) {
  return current ? std::min(*current, level) : level;
}

}  // namespace

double CoagulationKernel::operator()(double x, double y) const {
  if (sum_cutoff && x + y > *sum_cutoff) {
    return 0.0;
  }
  return k0 * (std::pow(1.0 + x, mu) * std::pow(1.0 + y, mu));
}

double FragmentationLaw::rate(double y) const {
  if (trunc_level && y > *trunc_level) {
    return 0.0;
  }
  return alpha0 * std::pow(y, lambda);
}

double FragmentationLaw::daughter(double x, double y) const {
  if (!(x > 0.0) || !(x < y)) {
    return 0.0;
  }
  return (2.0 + nu) / y * std::pow(x / y, nu);
}

void validate(const KernelSet& kset) {
  const auto& k = kset.coagulation;
  require(finite(k.k0) && k.k0 >= 0.0, "kernels.k0 must be finite and >= 0");
  require(finite(k.mu), "kernels.mu must be finite");
  if (k.sum_cutoff) {
    require(finite(*k.sum_cutoff) && *k.sum_cutoff > 0.0, "kernels.sum_cutoff must be > 0");
  }
  const auto& b = kset.fragmentation;
  require(finite(b.alpha0) && b.alpha0 >= 0.0, "kernels.alpha0 must be finite and >= 0");
  require(b.lambda > 0.0 && b.lambda < 1.0, "kernels.lambda must lie in (0, 1)");
  require(b.nu > -1.0 && b.nu <= 0.0, "kernels.nu must lie in (-1, 0]");
  if (b.trunc_level) {
    require(finite(*b.trunc_level) && *b.trunc_level > 0.0, "kernels.trunc_level must be > 0");
  }
  if (kset.tabulated_coagulation) {
    const Matrix& t = *kset.tabulated_coagulation;
    require(t.rows() == t.cols(), "tabulated coagulation kernel must be square");
    for (std::size_t i = 0; i < t.rows(); ++i) {
      for (std::size_t j = 0; j < t.cols(); ++j) {
        require(finite(t(i, j)) && t(i, j) >= 0.0,
                "tabulated coagulation kernel must be finite and non-negative");
        require(t(i, j) == t(j, i), "tabulated coagulation kernel must be symmetric");
      }
    }
  }
}

KernelValues eval_kernels(const KernelSet& kset, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) {
    throw std::invalid_argument("eval_kernels: sizes must be positive");
  }
  validate(kset);
  return {kset.coagulation(x, y), kset.fragmentation.rate(y), kset.fragmentation.daughter(x, y)};
}

double fragment_count(const FragmentationLaw& law) {
  if (!(law.nu > -1.0 && law.nu <= 0.0)) {
    throw std::invalid_argument("fragment_count: nu must lie in (-1, 0]");
  }
  return (law.nu + 2.0) / (law.nu + 1.0);
}

KernelSet truncate(const KernelSet& kset, double level) {
  if (!(level > 0.0) || !finite(level)) {
    throw std::invalid_argument("truncate: level must be positive and finite");
  }
  KernelSet out = kset;
  out.coagulation.sum_cutoff = tighter(kset.coagulation.sum_cutoff, level);
  out.fragmentation.trunc_level = tighter(kset.fragmentation.trunc_level, level);
  return out;
}

KernelMatrices precompute(const KernelSet& kset, const Grid& grid, GainPairing pairing) {
  validate(kset);
  const std::size_t n = grid.n_cells;
  if (kset.tabulated_coagulation && kset.tabulated_coagulation->rows() != n) {
    throw std::invalid_argument("precompute: tabulated kernel size does not match grid");
  }

  KernelMatrices m;
  m.n = n;
  m.pairing = pairing;
  m.coagulation = Matrix(n, n);
  m.rate.resize(n);
  m.daughter_number = Matrix(n, n);
  m.daughter_mass = Matrix(n, n);
  m.fragment_gain = Matrix(n, n);

  const auto& coag = kset.coagulation;
  // Lattice sums hit the cutoff exactly; the tolerance keeps those pairs out.
  const double edge_tol = 1e-9 * grid.dx;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double xi = grid.centers[i];
      const double xj = grid.centers[j];
      double k = kset.tabulated_coagulation ? (*kset.tabulated_coagulation)(i, j)
                                            : coag(xi, xj);
      if (coag.sum_cutoff && !(xi + xj < *coag.sum_cutoff - edge_tol)) {
        k = 0.0;
      }
      m.coagulation(i, j) = k;
      m.coagulation(j, i) = k;
    }
  }

  const auto& frag = kset.fragmentation;
  const double nu = frag.nu;
  const double number_scale = (2.0 + nu) / (1.0 + nu);
  for (std::size_t j = 0; j < n; ++j) {
    m.rate[j] = frag.rate(grid.centers[j]);
    const double y = grid.centers[j];
    for (std::size_t i = 0; i <= j; ++i) {
      const double lo = grid.lower_edge(i) / y;
      const double hi = std::min(grid.upper_edge(i), y) / y;
      if (!(hi > lo)) {
        continue;
      }
      m.daughter_number(i, j) = number_scale * (std::pow(hi, nu + 1.0) - std::pow(lo, nu + 1.0));
      m.daughter_mass(i, j) = y * (std::pow(hi, nu + 2.0) - std::pow(lo, nu + 2.0));
      m.fragment_gain(i, j) = m.daughter_mass(i, j) / grid.centers[i];
    }
  }
  return m;
}

}  // namespace cfopt
