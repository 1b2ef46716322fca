#include <catch2/catch_amalgamated.hpp>

#include "mems/equilibrium.hpp"
#include "mems/evolution.hpp"

using namespace mems;
using Catch::Approx;

TEST_CASE("lambda = 0 keeps the flat state flat") {
    Grid g(64);
    ModelParams p{0.0, 0.01, 4, Order::second};
    EvolveConfig c;
    c.t_end = 0.5;
    Trajectory tr = evolve(Field(g), p, c);
    for (const Field& f : tr.snapshots) {
        REQUIRE(f.min() == 0.0);
        REQUIRE(f.max() == 0.0);
    }
    for (const auto& fr : tr.fronts) REQUIRE_FALSE(fr.has_value());
    REQUIRE_FALSE(tr.touchdown_time.has_value());
    REQUIRE(tr.steady);
}

TEST_CASE("single step is first-order consistent") {
    Grid g(128);
    ModelParams p{2.0, 0.05, 4, Order::second};
    const LinearOperator op = build_elastic(p.order, g);
    Field u(g);
    for (int i = 0; i < g.n; ++i) u.values[i] = -0.4 * (1.0 - g.x(i) * g.x(i));
    // forward-Euler reference u + dt (s_e L u - force)
    auto euler = [&](double dt) {
        auto Lu = op.apply(u.values);
        Field e = u;
        for (int i = 0; i < g.n; ++i)
            e.values[i] += dt * (op.elastic_sign() * Lu[i] - force(u.values[i], p));
        return e;
    };
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double dt = 1e-6 / (1 << k);
        const double err = max_abs_diff(detail::step_raw(u, op, p, dt), euler(dt));
        if (k > 0) REQUIRE(err == Approx(prev / 4.0).epsilon(0.2)); // O(dt^2)
        prev = err;
    }
}

TEST_CASE("detect_fronts on synthetic profiles") {
    Grid g(400);
    const double eps = 0.01;
    REQUIRE_FALSE(detect_fronts(Field(g), eps).has_value());

    // u = -1+eps on [-0.5, 0.5], linear ramp to 0 at +-1
    Field u(g);
    for (int i = 0; i < g.n; ++i) {
        const double ax = std::abs(g.x(i));
        u.values[i] = ax <= 0.5 ? -1.0 + eps : (-1.0 + eps) * (1.0 - ax) / 0.5;
    }
    auto fr = detect_fronts(u, eps);
    REQUIRE(fr.has_value());
    // threshold -1+2eps crosses the ramp at |x| = 0.5 + 0.5 eps/(1-eps)
    const double xth = 0.5 + 0.5 * eps / (1.0 - eps);
    REQUIRE(fr->first == Approx(-xth).margin(2.0 * g.h));
    REQUIRE(fr->second == Approx(xth).margin(2.0 * g.h));
}

TEST_CASE("touchdown run: symmetry, energy monotonicity, comparison bounds") {
    ModelParams p{5.0, 0.01, 4, Order::second};
    Grid g(401);
    EvolveConfig c;
    c.t_end = 0.1;
    // the stepper is first order in time; cap dt so the comparison with the
    // near-exact scalar flows is not polluted by O(dt) lag
    c.dt_max = 5e-4;
    Trajectory tr = evolve(Field(g), p, c);

    REQUIRE(tr.touchdown_time.has_value());
    REQUIRE(*tr.touchdown_x == Approx(0.0).margin(2.0 * g.h));
    for (const Field& f : tr.snapshots) {
        REQUIRE(f.min() > -1.0);
        for (int i = 0; i < g.n; ++i)
            REQUIRE(f.values[i] == Approx(f.values[g.n - 1 - i]).margin(1e-10));
    }
    for (size_t i = 1; i < tr.energies.size(); ++i)
        REQUIRE(tr.energies[i] <= tr.energies[i - 1] + 1e-10 * std::abs(tr.energies[i - 1]));
    REQUIRE(tr.max_energy_increase <= 1e-10 * std::abs(tr.energies.front()));

    // backward Euler lags the exact flow by O(dt); the measured gap against
    // the scalar bounds is about 4.5 dt_max, independent of the grid
    const double slack = 8.0 * c.dt_max;
    for (size_t i = 0; i < tr.times.size(); ++i) {
        const auto [lo, hi] = comparison_bounds(tr.snapshots.front(), p, tr.times[i]);
        REQUIRE(lo <= tr.snapshots[i].min() + slack);
        // the scalar upper flow is a supersolution only while it dominates the
        // boundary data; past that the Dirichlet value 0 is the valid ceiling
        REQUIRE(tr.snapshots[i].max() <= std::max(hi, 0.0) + slack);
        REQUIRE(lo > std::min(0.0, -1.0 + p.eps) - 1e-8);
    }
}

TEST_CASE("small lambda relaxes to the minimal equilibrium") {
    ModelParams p{0.1, 0.01, 4, Order::second};
    Grid g(256);
    EvolveConfig c;
    c.t_end = 50.0;
    Trajectory tr = evolve(Field(g), p, c);
    REQUIRE(tr.steady);
    REQUIRE_FALSE(tr.touchdown_time.has_value());
    REQUIRE(tr.snapshots.back().min() > -0.5);

    const LinearOperator op = build_elastic(p.order, g);
    const Field eq = solve_at_lambda(op, p, tr.snapshots.back(), 1e-12);
    REQUIRE(max_abs_diff(tr.snapshots.back(), eq) < 1e-5);
}

TEST_CASE("eps > 0 steady state is a regular perturbation below the fold") {
    Grid g(256);
    EvolveConfig c;
    c.t_end = 100.0;
    ModelParams p0{0.2, 0.0, 4, Order::second};
    ModelParams pe{0.2, 0.05, 4, Order::second};
    const Field u0 = evolve(Field(g), p0, c).snapshots.back();
    const Field ue = evolve(Field(g), pe, c).snapshots.back();
    const double d = max_abs_diff(u0, ue);
    REQUIRE(d > 0.0);
    REQUIRE(d < 20.0 * pe.eps * pe.eps); // O(eps^{m-2})
}

TEST_CASE("scalar comparison flow decays onto u = -1+eps") {
    ModelParams p{1.0, 0.1, 4, Order::second};
    // starting below the rest point, the scalar flow rises toward it
    const auto v = scalar_flow(-0.95, p, {0.1, 1.0, 10.0});
    REQUIRE(v[0] > -0.95);
    REQUIRE(v[2] == Approx(-1.0 + p.eps).margin(1e-4));
    // flat zero-lambda flow
    ModelParams z{0.0, 0.1, 4, Order::second};
    REQUIRE(scalar_flow(0.0, z, {1.0})[0] == 0.0);
}

TEST_CASE("evolve rejects touching initial data") {
    Grid g(32);
    Field u(g);
    u.values[3] = -1.0;
    ModelParams p{1.0, 0.1, 4, Order::second};
    EvolveConfig c;
    REQUIRE_THROWS_AS(evolve(u, p, c), std::domain_error);
    REQUIRE_THROWS_AS(comparison_bounds(u, p, 1.0), std::domain_error);
    ModelParams f4{1.0, 0.1, 4, Order::fourth};
    REQUIRE_THROWS_AS(comparison_bounds(Field(g), f4, 1.0), std::invalid_argument);
}
