#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mems/banded.hpp"
#include "mems/grid.hpp"
#include "mems/numerics.hpp"
#include "mems/operators.hpp"

using namespace mems;
using Catch::Approx;

namespace {

Field sample(const Grid& g, double (*f)(double)) {
    Field u(g);
    for (int i = 0; i < g.n; ++i) u.values[i] = f(g.x(i));
    return u;
}

double max_apply_error(const LinearOperator& op, const Field& u,
                       double (*exact)(double), double xcut) {
    const auto r = op.apply(u.values);
    double mx = 0.0;
    for (int i = 0; i < u.n(); ++i)
        if (std::abs(u.grid.x(i)) < xcut)
            mx = std::max(mx, std::abs(r[i] - exact(u.grid.x(i))));
    return mx;
}

} // namespace

TEST_CASE("Grid geometry") {
    Grid g(101);
    REQUIRE(g.h * (g.n + 1) == Approx(2.0).margin(1e-15));
    for (int i = 0; i < g.n; ++i)
        REQUIRE(g.x(i) == Approx(-g.x(g.n - 1 - i)).margin(1e-14));
    REQUIRE(g.x(0) > -1.0);
    REQUIRE(g.x(g.n - 1) < 1.0);
    REQUIRE_THROWS_AS(Grid(8), std::invalid_argument);
}

TEST_CASE("Laplacian is exact on quadratics") {
    Grid g(64);
    const LinearOperator op = build_laplacian(g);
    const Field u = sample(g, [](double x) { return x * x - 1.0; });
    const auto r = op.apply(u.values);
    for (double v : r) REQUIRE(v == Approx(2.0).margin(1e-10));
    REQUIRE(op.apply(std::vector<double>(g.n, 0.0)) == std::vector<double>(g.n, 0.0));
}

TEST_CASE("Laplacian converges at order 2") {
    auto exact = [](double x) {
        const double k = M_PI / 2.0;
        return -k * k * std::sin(k * (x + 1.0));
    };
    std::vector<double> lh, le;
    for (int n : {63, 127, 255, 511}) {
        Grid g(n);
        const LinearOperator op = build_laplacian(g);
        const Field u = sample(g, [](double x) { return std::sin(M_PI / 2.0 * (x + 1.0)); });
        const auto r = op.apply(u.values);
        double mx = 0.0;
        for (int i = 0; i < n; ++i) mx = std::max(mx, std::abs(r[i] - exact(g.x(i))));
        lh.push_back(std::log(g.h));
        le.push_back(std::log(mx));
    }
    REQUIRE(fit_line(lh, le).slope == Approx(2.0).margin(0.05));
}

TEST_CASE("biharmonic applies d4/dx4 to the clamped quartic") {
    Grid g(255);
    const LinearOperator op = build_biharmonic(g);
    const Field u = sample(g, [](double x) { return (1.0 - x * x) * (1.0 - x * x); });
    // (1-x^2)^2 satisfies the clamped boundary conditions; away from the
    // boundary rows the 5-point stencil is exact on quartics
    const auto r = op.apply(u.values);
    for (int i = 2; i < g.n - 2; ++i) REQUIRE(r[i] == Approx(24.0).margin(1e-5));
}

TEST_CASE("biharmonic converges at order 2") {
    // u = (1-x^2)^2 (2 + sin(pi x)) satisfies u = u' = 0 at both ends
    auto f = [](double x) {
        const double q = (1.0 - x * x) * (1.0 - x * x);
        return q * (2.0 + std::sin(M_PI * x));
    };
    auto d4 = [](double x) {
        const double s = std::sin(M_PI * x), c = std::cos(M_PI * x);
        const double p = M_PI;
        const double q = (1 - x * x) * (1 - x * x), q1 = -4 * x * (1 - x * x),
                     q2 = 12 * x * x - 4, q3 = 24 * x;
        return 24.0 * (2 + s) + 4 * q3 * p * c + 6 * q2 * (-p * p * s) +
               4 * q1 * (-p * p * p * c) + q * (p * p * p * p * s);
    };
    std::vector<double> lh, le;
    for (int n : {127, 255, 511, 1023}) {
        Grid g(n);
        const LinearOperator op = build_biharmonic(g);
        Field u(g);
        for (int i = 0; i < n; ++i) u.values[i] = f(g.x(i));
        const auto r = op.apply(u.values);
        // the two ghost-closure rows carry a lower-order local truncation
        // (standard for reflected clamped closures); measure away from them
        double mx = 0.0;
        for (int i = 2; i < n - 2; ++i) mx = std::max(mx, std::abs(r[i] - d4(g.x(i))));
        lh.push_back(std::log(g.h));
        le.push_back(std::log(mx));
    }
    REQUIRE(fit_line(lh, le).slope == Approx(2.0).margin(0.1));
}

TEST_CASE("operators are symmetric") {
    Grid g(33);
    for (const LinearOperator& op : {build_laplacian(g), build_biharmonic(g)}) {
        for (int i = 0; i < g.n; ++i)
            for (int j = std::max(0, i - op.band.ku); j <= std::min(g.n - 1, i + op.band.ku); ++j)
                REQUIRE(op.band.at(i, j) == op.band.at(j, i));
    }
}

TEST_CASE("stiffness forms are positive definite") {
    Grid g(64);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (const LinearOperator& op : {build_laplacian(g), build_biharmonic(g)}) {
        const Banded S = op.stiffness();
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> v(g.n);
            for (double& x : v) x = U(rng);
            const auto Sv = S.apply(v);
            double q = 0.0;
            for (int i = 0; i < g.n; ++i) q += v[i] * Sv[i];
            REQUIRE(q > 0.0);
        }
        // smallest eigenvalue by inverse power iteration
        BandedLU lu{Banded(S)};
        std::vector<double> v(g.n, 1.0);
        double mu = 0.0;
        for (int it = 0; it < 60; ++it) {
            auto w = lu.solve(std::vector<double>(v));
            double nw = 0.0;
            for (double x : w) nw = std::max(nw, std::abs(x));
            for (double& x : w) x /= nw;
            mu = 1.0 / nw;
            v = std::move(w);
        }
        REQUIRE(mu > 0.0);
        if (op.order == Order::second) {
            // Dirichlet Laplacian: smallest eigenvalue (pi/2)^2
            REQUIRE(mu == Approx(M_PI * M_PI / 4.0).epsilon(1e-2));
        }
    }
}

TEST_CASE("norm_sq trapezoid values") {
    Grid g(200);
    Field ones(g, std::vector<double>(g.n, 1.0));
    REQUIRE(norm_sq(ones) == Approx(2.0 - g.h).margin(1e-13));
    REQUIRE(norm_sq(Field(g)) == 0.0);
    Field u(g);
    for (int i = 0; i < g.n; ++i) u.values[i] = 1.0 - g.x(i) * g.x(i);
    REQUIRE(norm_sq(u) == Approx(16.0 / 15.0).margin(5.0 * g.h * g.h));
}

TEST_CASE("interior_min refines parabolically") {
    Grid g(100);
    Field u(g);
    const double x0 = 0.23456;
    for (int i = 0; i < g.n; ++i) u.values[i] = (g.x(i) - x0) * (g.x(i) - x0) - 0.5;
    double xm, um;
    interior_min(u, xm, um);
    REQUIRE(xm == Approx(x0).margin(1e-10));
    REQUIRE(um == Approx(-0.5).margin(1e-10));
}

TEST_CASE("default_grid_n resolves the boundary layers") {
    REQUIRE(default_grid_n(Order::second, 0.0) == 512);
    REQUIRE(default_grid_n(Order::second, 0.01) == 800);
    REQUIRE(default_grid_n(Order::second, 0.001) == 8000);
    REQUIRE(default_grid_n(Order::fourth, 0.01) == 512); // floor dominates
    REQUIRE(default_grid_n(Order::fourth, 0.001) ==
            (int)std::ceil(8.0 / std::pow(0.001, 0.75)));
}
