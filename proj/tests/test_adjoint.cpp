#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cfopt/adjoint.hpp"
#include "cfopt/dynamics.hpp"
#include "cfopt/validation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cfopt;
using doctest::Approx;

namespace {

KernelSet random_kernels(SplitMix64& rng, double L) {
  KernelSet k;
  k.coagulation = {rng.uniform(0.01, 1.0), rng.uniform(-0.5, 1.0), rng.uniform(0.3, 1.2) * L};
  k.fragmentation = {rng.uniform(0.0, 1.0), rng.uniform(0.1, 0.9), -rng.uniform(0.0, 0.9),
                     std::nullopt};
  return k;
}

}  // namespace

TEST_SUITE("adjoint") {
  TEST_CASE("terminal gradient") {
    const Grid g = make_grid(800, 25.0);
    const Vector d = terminal_gradient(TerminalCost{}, g);
    for (std::size_t i = 0; i < 800; ++i) REQUIRE(d[i] == (i < 160 ? 1.0 : 0.0));
    CHECK(terminal_gradient({1.0, 0.0, 25.0}, g) == Vector(800, 1.0));
    const Vector neg = terminal_gradient({-1.0, 0.0, 5.0}, g);
    for (std::size_t i = 0; i < 800; ++i) REQUIRE(neg[i] == -d[i]);
    CHECK_THROWS_AS(terminal_gradient({1.0, 0.0, 0.01}, g), std::invalid_argument);
    CHECK_THROWS_AS(terminal_gradient({1.0, 5.0, 1.0}, g), std::invalid_argument);
    CHECK_THROWS_AS(terminal_gradient({2.0, 0.0, 5.0}, g), std::invalid_argument);
  }

  TEST_CASE("zero adjoint") {
    const Grid g = make_grid(30, 25.0);
    const KernelMatrices m = precompute(test::reference_kernels(), g);
    const Vector f = GaussianInitial{}.sample(g);
    CHECK(apply_adjoint_rhs(Vector(30, 0.0), f, 1.3, m, g) == Vector(30, 0.0));
  }

  TEST_CASE("exact duality on random instances") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + trial % 30;
      const double L = rng.uniform(1.0, 30.0);
      const Grid g = make_grid(n, L);
      const KernelMatrices m = precompute(random_kernels(rng, L), g, static_cast<GainPairing>(trial % 3));
      const Vector f = test::random_vector(rng, n, 0.0, 2.0);
      const Vector h = test::random_vector(rng, n);
      const Vector phi = test::random_vector(rng, n);

      const double lhs_f = inner_product(phi, apply_F(f, m, g), g);
      const double rhs_f = inner_product(fragmentation_adjoint(phi, m, g), f, g);
      const double scale_f = std::max(1.0, std::abs(lhs_f));
      REQUIRE(std::abs(lhs_f - rhs_f) <= 1e-12 * scale_f);

      const Vector dc = oracle::coagulation_derivative(f, h, m.coagulation, g, m.pairing);
      const double lhs_c = inner_product(phi, dc, g);
      const double rhs_c = inner_product(coagulation_adjoint(phi, f, m, g), h, g);
      const double scale_c = std::max(1.0, std::abs(lhs_c));
      REQUIRE(std::abs(lhs_c - rhs_c) <= 1e-12 * scale_c);
    }
  }

  TEST_CASE("derivative oracle is the directional derivative of apply_C") {
    SplitMix64 rng(8);
    const Grid g = make_grid(8, 10.0);
    const KernelMatrices m = precompute(random_kernels(rng, 10.0), g);
    const Vector f = test::random_vector(rng, 8, 0.0, 2.0);
    const Vector h = test::random_vector(rng, 8);
    Vector plus(8), minus(8);
    for (std::size_t i = 0; i < 8; ++i) {
      plus[i] = f[i] + h[i];
      minus[i] = f[i] - h[i];
    }
    const Vector cp = apply_C(plus, m, g);
    const Vector cm = apply_C(minus, m, g);
    const Vector dc = oracle::coagulation_derivative(f, h, m.coagulation, g, m.pairing);
    for (std::size_t i = 0; i < 8; ++i) CHECK(0.5 * (cp[i] - cm[i]) == Approx(dc[i]).epsilon(1e-12));
  }

  TEST_CASE("zero generator keeps the terminal gradient") {
    Problem p = test::make_problem(50, 0.1, test::no_dynamics());
    const Control u = p.constant_control(1.7);
    const Trajectory traj = p.solve(u);
    const AdjointTrajectory adj = p.solve_adjoint(u, traj);
    const Vector d = terminal_gradient(p.cost.terminal, p.grid);
    REQUIRE(adj.values.size() == 11);
    for (const auto& phi : adj.values) CHECK(phi == d);
    const Vector grad = p.gradient_of(u);
    for (double v : grad) CHECK(v == Approx(0.7).epsilon(1e-15));
  }

  TEST_CASE("costs") {
    const Problem p = test::make_problem(100, 0.05);
    const Control one = p.constant_control(1.0);
    const Trajectory traj = p.solve(one);
    const double terminal = window_mass(traj.terminal(), 0.0, 5.0, p.grid);
    CHECK(discrete_cost(one, traj, p.cost, p.grid, p.time) == terminal);
    CHECK(running_cost(Vector(20, 3.0), 0.0, p.time) == 0.0);
    CHECK(running_cost(Vector(20, 3.0), 2.0, p.time) == Approx(0.5 * 2.0 * 4.0 * 1.0));
    CHECK(terminal_cost(traj.terminal(), {-1.0, 0.0, 5.0}, p.grid) == -terminal);
    CHECK(p.cost_of(one.values) == discrete_cost(one, traj, p.cost, p.grid, p.time));
  }

  TEST_CASE("reduced gradient at the baseline control") {
    const Problem p = test::make_problem(800, 0.005, test::reference_kernels(), 0.0);
    const Control one = p.constant_control(1.0);
    const Trajectory traj = p.solve(one);
    const AdjointTrajectory adj = p.solve_adjoint(one, traj);
    const Vector g = reduced_gradient(one, traj, adj, p.cost, p.kernels, p.grid, p.time);
    CHECK(g == switching_function(traj, adj, p.kernels, p.grid, p.time));
    double sum = 0.0;
    for (double v : g) sum += v;
    // More coagulation empties the small-size window.
    CHECK(sum < 0.0);

    double bound = 0.0;
    for (const auto& phi : adj.values) bound = std::max(bound, test::max_abs(phi));
    CHECK(std::isfinite(bound));
    CHECK(bound < 10.0);
  }

  TEST_CASE("coagulation-free gradient is the quadratic term") {
    KernelSet k = test::reference_kernels();
    k.coagulation.k0 = 0.0;
    const Problem p = test::make_problem(100, 0.05, k, 2.0);
    Control u = p.constant_control(1.0);
    for (std::size_t i = 0; i < u.size(); ++i) u.values[i] = 0.5 + 0.05 * static_cast<double>(i);
    const Vector g = p.gradient_of(u);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(g[i] == 2.0 * (u.values[i] - 1.0));
  }

  TEST_CASE("discrete adjoint matches central differences") {
    // The exact discrete gradient against the finite-difference oracle of the
    // fully discrete cost on a coarse time grid.
    const Problem p = test::make_problem(200, 0.025, test::reference_kernels(), 1.0);
    Control u = p.constant_control(1.0);
    for (std::size_t k = 0; k < u.size(); ++k) u.values[k] = 1.0 + 0.5 * std::sin(0.3 * k);
    const Vector exact = discrete_adjoint_gradient(p, u);
    const Vector fd = fd_gradient(p, u);
    for (std::size_t k = 0; k < u.size(); ++k) {
      CHECK(exact[k] / p.time.dt == Approx(fd[k]).epsilon(1e-6).scale(1.0));
    }
  }
}
