#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cfopt/errors.hpp"
#include "cfopt/optimizer.hpp"
#include "support.hpp"

using namespace cfopt;
using doctest::Approx;

TEST_SUITE("optimizer") {
  TEST_CASE("projection") {
    CHECK(project_control(Vector{1.7}, 0.2, 1.5).values[0] == 1.5);
    CHECK(project_control(Vector{0.9}, 0.2, 1.5).values[0] == 0.9);
    CHECK(project_control(Vector{-3.0}, 0.2, 1.5).values[0] == 0.2);
    CHECK_THROWS_AS(project_control(Vector{1.0}, 2.0, 1.0), std::invalid_argument);

    SplitMix64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const Vector raw = test::random_vector(rng, 30, -5.0, 5.0);
      const Control once = project_control(raw, 0.1, 2.0);
      REQUIRE(project_control(once.values, 0.1, 2.0).values == once.values);
      REQUIRE(once.admissible());
    }
  }

  TEST_CASE("gradient mapping") {
    const Control inside = Control::constant(5, 1.0, {0.1, 2.0});
    CHECK(gradient_mapping(inside, Vector(5, 0.0), 0.1) == Vector(5, 0.0));
    const Vector g{0.3, -0.2, 0.1, 0.0, 1.0};
    const Vector mapped = gradient_mapping(inside, g, 0.01);
    for (std::size_t k = 0; k < 5; ++k) CHECK(mapped[k] == Approx(g[k]).epsilon(1e-12));
    const Control top = Control::constant(3, 2.0, {0.1, 2.0});
    CHECK(gradient_mapping(top, Vector(3, -4.0), 0.5) == Vector(3, 0.0));
    CHECK_THROWS_AS(gradient_mapping(inside, g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gradient_mapping(inside, Vector(2, 0.0), 1.0), std::invalid_argument);
  }

  TEST_CASE("l2 norm is dt weighted") {
    CHECK(l2_norm(Vector(4, 1.0), 0.25) == 1.0);
    CHECK(l2_norm(Vector{3.0, 4.0}, 1.0) == 5.0);
  }

  TEST_CASE("Armijo step on the quadratic cost") {
    const Problem p = test::make_problem(40, 0.1, test::no_dynamics(), 1.0, {0.5, 2.0});
    const Control u = Control::constant(10, 1.5, {0.5, 2.0});
    const Vector g = p.gradient_of(u);
    for (double v : g) REQUIRE(v == Approx(0.5).epsilon(1e-15));
    const double cost = p.cost_of(u.values);
    const CostOracle oracle = [&](const Control& c) { return p.cost_of(c.values); };
    const ArmijoResult step = armijo_step(u, g, cost, OptimizerConfig{}, p.time.dt, oracle);
    CHECK(step.eta == 0.1);
    CHECK(step.backtracks == 0);
    for (double v : step.next.values) CHECK(v == Approx(1.45).epsilon(1e-15));
    CHECK(step.cost < cost);
  }

  TEST_CASE("Armijo edge cases") {
    const Control u = Control::constant(6, 1.2, {0.1, 2.0});
    OptimizerConfig cfg;
    cfg.max_backtracks = 5;
    const CostOracle flat = [](const Control&) { return 1.0; };
    const ArmijoResult still = armijo_step(u, Vector(6, 0.0), 1.0, cfg, 0.1, flat);
    CHECK(still.next.values == u.values);
    CHECK(still.eta == cfg.eta0);

    int calls = 0;
    const CostOracle infinite = [&](const Control&) {
      ++calls;
      return std::numeric_limits<double>::infinity();
    };
    try {
      (void)armijo_step(u, Vector(6, 1.0), 1.0, cfg, 0.1, infinite);
      FAIL("expected LineSearchStalled");
    } catch (const LineSearchStalled& e) {
      CHECK(e.backtracks() == 5);
    }
    CHECK(calls == 6);

    const CostOracle failing = [](const Control&) -> double { throw SolverError("boom", 2); };
    CHECK_THROWS_AS(armijo_step(u, Vector(6, 1.0), 1.0, cfg, 0.1, failing), LineSearchStalled);
  }

  TEST_CASE("Hamiltonian minimiser") {
    CHECK(hamiltonian_minimiser(0.3, 1.0, {0.1, 2.0}) == Approx(0.7));
    CHECK(hamiltonian_minimiser(5.0, 1.0, {0.1, 2.0}) == 0.1);
    CHECK(hamiltonian_minimiser(-5.0, 1.0, {0.1, 2.0}) == 2.0);
    CHECK(hamiltonian_minimiser(0.2, 0.0, {0.1, 2.0}) == 0.1);
    CHECK(hamiltonian_minimiser(-0.2, 0.0, {0.1, 2.0}) == 2.0);

    // Brute-force scan of the box.
    SplitMix64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
      const double c = rng.uniform(-3.0, 3.0);
      const double w = rng.uniform(0.0, 4.0);
      const ControlBounds b{rng.uniform(0.05, 1.0), rng.uniform(1.0, 4.0)};
      const double star = hamiltonian(hamiltonian_minimiser(c, w, b), c, w);
      for (int s = 0; s <= 400; ++s) {
        const double omega = b.u_min + (b.u_max - b.u_min) * s / 400.0;
        REQUIRE(hamiltonian(omega, c, w) >= star - 1e-12);
      }
    }
  }

  TEST_CASE("PMP residuals") {
    const TimeGrid t = make_time_grid(1.0, 0.1);
    const Control one = Control::constant(10, 1.0, {0.1, 2.0});
    const PmpResiduals zero = pmp_residuals(one, Vector(10, 0.0), 1.0, t);
    CHECK(*zero.r == 0.0);
    CHECK(zero.s == 0.0);

    const PmpResiduals at_feedback =
        pmp_residuals(Control::constant(10, 0.7, {0.1, 2.0}), Vector(10, 0.3), 1.0, t);
    CHECK(*at_feedback.r == Approx(0.0).scale(1.0));
    CHECK(at_feedback.s == Approx(0.0).scale(1.0));
    CHECK(at_feedback.feedback == Vector(10, 0.7));

    const PmpResiduals unreg = pmp_residuals(one, Vector(10, 0.3), 0.0, t);
    CHECK_FALSE(unreg.r.has_value());
    CHECK(unreg.feedback.empty());

    // With C f = 0 the feedback ignores phi entirely.
    const Problem p = test::make_problem(30, 0.1, test::no_dynamics(), 1.0);
    const Control u = p.constant_control(1.4);
    const Trajectory traj = p.solve(u);
    AdjointTrajectory adj = p.solve_adjoint(u, traj);
    const PmpResiduals before = pmp_residuals(u, traj, adj, p.cost, p.kernels, p.grid, p.time);
    for (auto& phi : adj.values)
      for (double& v : phi) v += 3.0;
    const PmpResiduals after = pmp_residuals(u, traj, adj, p.cost, p.kernels, p.grid, p.time);
    CHECK(before.feedback == after.feedback);
  }

  TEST_CASE("zero updates when the entry iterate is stationary") {
    const Problem p = test::make_problem(40, 0.1, test::no_dynamics(), 1.0);
    const RunRecord run = pgd_run(p, p.constant_control(1.0), OptimizerConfig{});
    CHECK(run.updates == 0);
    CHECK(run.reason == Termination::Converged);
    REQUIRE(run.iterations.size() == 1);
    CHECK(run.iterations[0].eta == 0.0);
    CHECK(run.control.values == p.constant_control(1.0).values);
  }

  TEST_CASE("quadratic problem converges to the baseline") {
    const Problem p = test::make_problem(40, 0.1, test::no_dynamics(), 1.0, {0.1, 2.0});
    OptimizerConfig cfg;
    cfg.eps = 1e-6;
    cfg.max_iter = 1000;
    const RunRecord run = pgd_run(p, Control::constant(10, 1.9, {0.1, 2.0}), cfg);
    CHECK(run.reason == Termination::Converged);
    for (double v : run.control.values) CHECK(v == Approx(1.0).epsilon(1e-5));
  }

  TEST_CASE("iteration cap and input checks") {
    const Problem p = test::make_problem(40, 0.1, test::no_dynamics(), 1.0, {0.1, 2.0});
    OptimizerConfig cfg;
    cfg.eps = 1e-12;
    cfg.max_iter = 3;
    const RunRecord run = pgd_run(p, Control::constant(10, 1.9, {0.1, 2.0}), cfg);
    CHECK(run.reason == Termination::MaxIterations);
    CHECK(run.updates == 3);
    CHECK(run.iterations.size() == 4);
    CHECK_THROWS_AS(pgd_run(p, Control::constant(10, 2.5, {0.1, 2.0}), cfg), std::invalid_argument);
    CHECK_THROWS_AS(pgd_run(p, Control::constant(3, 1.0, {0.1, 2.0}), cfg), std::invalid_argument);
    cfg.beta = 1.0;
    CHECK_THROWS_AS(pgd_run(p, Control::constant(10, 1.0, {0.1, 2.0}), cfg), std::invalid_argument);
  }

  TEST_CASE("descent contracts on a coarse reference problem") {
    const Problem p = test::make_problem(200, 0.02, test::reference_kernels(), 1.0);
    const OptimizerConfig cfg;
    const RunRecord run = pgd_run(p, p.constant_control(1.0), cfg);
    CHECK(run.updates > 0);
    for (std::size_t i = 1; i < run.iterations.size(); ++i) {
      const auto& prev = run.iterations[i - 1];
      const auto& cur = run.iterations[i];
      REQUIRE(cur.cost <= prev.cost);
      REQUIRE(prev.eta > 0.0);
    }
    CHECK(run.control.admissible());
    CHECK(run.total_cost == run.iterations.back().cost);
    CHECK(run.iterations.front().r > run.iterations.back().r);

    const RunRecord again = pgd_run(p, p.constant_control(1.0), cfg);
    CHECK(bitwise_equal(run, again));
    RunRecord tweaked = again;
    tweaked.control.values[0] = std::nextafter(tweaked.control.values[0], 10.0);
    CHECK_FALSE(bitwise_equal(run, tweaked));
  }

  TEST_CASE("a huge weight keeps the baseline") {
    const Problem p = test::make_problem(200, 0.02, test::reference_kernels(), 1e6);
    const RunRecord run = pgd_run(p, p.constant_control(1.0), OptimizerConfig{});
    const double baseline = p.cost_of(p.constant_control(1.0).values);
    CHECK(run.terminal_cost == Approx(baseline).epsilon(1e-3));
  }

  TEST_CASE("termination names") {
    CHECK(to_string(Termination::Converged) == "converged");
    CHECK(to_string(Termination::MaxIterations) == "max_iterations");
    CHECK(to_string(Termination::LineSearchStalled) == "line_search_stalled");
  }
}
