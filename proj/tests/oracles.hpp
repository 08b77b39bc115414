#pragma once

// Brute-force reference implementations, written from the operator
// definitions pair by pair. Shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>

#include "cfopt/grid.hpp"
#include "cfopt/kernels.hpp"

namespace cfopt::oracle {

/// Adds `amount` for a new particle from pair sum index s = j + l, whose size
/// sits on the edge between cells s and s + 1.
inline void deposit(Vector& out, std::size_t s, double amount, GainPairing pairing) {
  const std::size_t n = out.size();
  auto put = [&](std::size_t i, double a) {
    if (i < n) out[i] += a;
  };
  switch (pairing) {
    case GainPairing::RoundUp:
      put(s + 1, amount);
      break;
    case GainPairing::RoundDown:
      put(s, amount);
      break;
    case GainPairing::Split:
      put(s, 0.5 * amount);
      put(s + 1, 0.5 * amount);
      break;
  }
}

/// C(f) by a double loop over ordered pairs.
inline Vector coagulation(const Vector& f, const Matrix& K, const Grid& g, GainPairing pairing) {
  const std::size_t n = f.size();
  Vector out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      const double rate = K(j, l) * f[j] * f[l] * g.dx;
      out[j] -= rate;
      deposit(out, j + l, 0.5 * rate, pairing);
    }
  }
  return out;
}

/// DC[f] h = 2 B(f, h), B the symmetric bilinear form with C(f) = B(f, f).
inline Vector coagulation_derivative(const Vector& f, const Vector& h, const Matrix& K,
                                     const Grid& g, GainPairing pairing) {
  const std::size_t n = f.size();
  Vector out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      const double r = K(j, l) * g.dx * (f[j] * h[l] + h[j] * f[l]);
      out[j] -= r;
      deposit(out, j + l, 0.5 * r, pairing);
    }
  }
  return out;
}

/// F(f): parent j breaks at rate alpha_j; the daughter mass landing in cell i
/// is carried by particles of size x_i.
inline Vector fragmentation(const Vector& f, const KernelSet& k, const Grid& g) {
  const std::size_t n = f.size();
  const auto& law = k.fragmentation;
  Vector out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = g.centers[j];
    const double broken = law.rate(y) * f[j];
    out[j] -= broken;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = g.lower_edge(i);
      const double hi = std::min(g.upper_edge(i), y);
      if (hi <= lo) continue;
      // int_lo^hi x b(x, y) dx with b = (2 + nu)/y (x/y)^nu
      const double mass = y * (std::pow(hi / y, law.nu + 2.0) - std::pow(lo / y, law.nu + 2.0));
      out[i] += broken * mass / g.centers[i];
    }
  }
  return out;
}

}  // namespace cfopt::oracle
