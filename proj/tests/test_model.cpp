#include <catch2/catch_amalgamated.hpp>

#include "mems/model.hpp"
#include "mems/operators.hpp"

using namespace mems;
using Catch::Approx;

TEST_CASE("ModelParams validation") {
    ModelParams p;
    REQUIRE_NOTHROW(p.validate());
    p.lambda = -1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.eps = 1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.m = 2;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("force vanishes at the potential minimum u = -1+eps") {
    for (double eps : {0.01, 0.05, 0.3}) {
        for (int m : {3, 4, 6}) {
            ModelParams p{2.7, eps, m, Order::second};
            // scale: the attractive term alone at the same point
            const double scale = p.lambda / (eps * eps);
            REQUIRE(std::abs(force(-1.0 + eps, p)) < 1e-12 * scale);
        }
    }
}

TEST_CASE("force at zero deflection, eps = 0") {
    ModelParams p{5.0, 0.0, 4, Order::second};
    REQUIRE(force(0.0, p) == Approx(5.0).margin(1e-14));
}

TEST_CASE("force and dforce_du are derivatives of potential_phi") {
    ModelParams p{1.0, 0.05, 4, Order::second};
    const double d = 1e-6;
    // log-spaced gaps from just above the repulsive wall out to u = 10
    for (double g = 10.0 * p.eps; g <= 11.0; g *= 1.9) {
        const double u = -1.0 + g;
        const double fd = (potential_phi(u + d, p) - potential_phi(u - d, p)) / (2.0 * d);
        REQUIRE(fd == Approx(force(u, p)).epsilon(1e-6));
        const double fd2 = (force(u + d, p) - force(u - d, p)) / (2.0 * d);
        REQUIRE(fd2 == Approx(dforce_du(u, p)).epsilon(1e-5));
    }
}

TEST_CASE("force_unit is force with lambda factored out") {
    ModelParams p{3.7, 0.02, 5, Order::second};
    for (double u : {-0.9, -0.5, 0.0, 1.0})
        REQUIRE(force(u, p) == Approx(p.lambda * force_unit(u, p)));
}

TEST_CASE("potential_phi closed-form spot value") {
    ModelParams p{1.0, 0.1, 4, Order::second};
    REQUIRE(potential_phi(0.0, p) == Approx(-1.0 + 0.01 / 3.0).margin(1e-15));
}

TEST_CASE("potential_phi monotonicity around its minimum") {
    ModelParams p{1.0, 0.1, 4, Order::second};
    // repulsive below -1+eps, attracting above
    double prev = potential_phi(-1.0 + 0.2 * p.eps, p);
    for (double g = 0.3; g < 1.0; g += 0.1) {
        const double cur = potential_phi(-1.0 + g * p.eps, p);
        REQUIRE(cur < prev);
        prev = cur;
    }
    prev = potential_phi(-1.0 + p.eps, p);
    for (double u = -1.0 + 2.0 * p.eps; u < 2.0; u += 0.2) {
        const double cur = potential_phi(u, p);
        REQUIRE(cur > prev);
        REQUIRE(cur < 0.0); // increases toward 0 from below
        prev = cur;
    }
}

TEST_CASE("potential_phi diverges as the gap closes") {
    ModelParams p{1.0, 0.1, 4, Order::second};
    REQUIRE(potential_phi(-1.0 + 1e-6, p) > 1e8);
    REQUIRE_THROWS_AS(potential_phi(-1.0, p), std::domain_error);
    REQUIRE_THROWS_AS(force(-1.5, p), std::domain_error);
    REQUIRE_THROWS_AS(dforce_du(-1.0, p), std::domain_error);
}

TEST_CASE("energy of the flat state") {
    Grid g(255);
    Field u(g);
    ModelParams p{1.0, 0.0, 4, Order::second};
    const LinearOperator op = build_laplacian(g);
    // u = 0: no elastic contribution, trapezoid of phi(0) = -1 over [-1,1]
    REQUIRE(energy(u, op, p) == Approx(-2.0).margin(1e-12));
    p.lambda = 7.3;
    REQUIRE(energy(u, op, p) == Approx(-2.0 * 7.3).margin(1e-11));
}

TEST_CASE("energy rejects closed gaps") {
    Grid g(31);
    Field u(g);
    u.values[10] = -1.0;
    ModelParams p{1.0, 0.1, 4, Order::second};
    const LinearOperator op = build_laplacian(g);
    REQUIRE_THROWS_AS(energy(u, op, p), std::domain_error);
}
