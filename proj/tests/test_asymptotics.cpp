#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mems/asymptotics.hpp"
#include "mems/numerics.hpp"

using namespace mems;
using Catch::Approx;

TEST_CASE("critical layer eigenvalues at m = 4") {
    REQUIRE(lambda0c_of(Order::second, 4) == 0.75);
    REQUIRE(lambda0c_of(Order::fourth, 4) == 27.0);
}

TEST_CASE("second-order inner profile: gamma and far field") {
    const InnerProfile pr = inner_laplacian(10.0, 4);
    REQUIRE(pr.gamma == Approx(-0.3166426151).margin(1e-7));
    // stability of the tail-subtracted quadrature in the matching window
    REQUIRE(inner_laplacian(10.0, 4, 50.0).gamma == Approx(pr.gamma).margin(1e-6));
    REQUIRE(inner_laplacian(10.0, 4, 200.0).gamma == Approx(pr.gamma).margin(1e-6));

    // left tail settles onto the fixed point v = 1
    REQUIRE(pr.v.front() == Approx(1.0).margin(1e-8));
    REQUIRE(pr.v.front() > 1.0);
    // far-field slope sqrt(2 lambda (m-2)/(m-1)) = sqrt(40/3)
    const double slope = (pr.eval(80.0) - pr.eval(70.0)) / 10.0;
    REQUIRE(slope == Approx(std::sqrt(40.0 / 3.0)).epsilon(5e-3));
    for (double v : pr.v) REQUIRE(v > 0.0);
    REQUIRE_THROWS_AS(inner_laplacian(-1.0, 4), std::invalid_argument);
}

TEST_CASE("second-order profile: first integral and the unreduced equation") {
    const double lambda = 10.0;
    const int m = 4;
    const InnerProfile pr = inner_laplacian(lambda, m);
    const double C = lambda * (m - 2) / (m - 1.0);
    for (size_t i = 0; i < pr.trace.xs.size(); ++i) {
        const double v = pr.trace.ys[i][0], vp = pr.trace.fs[i][0];
        const double E = 0.5 * vp * vp + lambda / v -
                         lambda / ((m - 1.0) * detail::ipow(v, m - 1)) - C;
        REQUIRE(E == Approx(0.0).margin(1e-10));
    }
    // the quadrature route only ever integrates the reduced equation; check
    // that its states also satisfy v'' = lambda/v^2 - lambda/v^m
    int checked = 0;
    for (size_t i = 1; i + 1 < pr.trace.xs.size(); ++i) {
        const double dx = pr.trace.xs[i + 1] - pr.trace.xs[i - 1];
        if (dx > 0.5) continue; // differencing noise on coarse strides
        const double vpp = (pr.trace.fs[i + 1][0] - pr.trace.fs[i - 1][0]) / dx;
        const double v = pr.trace.ys[i][0];
        const double rhs = lambda / (v * v) - lambda / detail::ipow(v, m);
        if (std::abs(rhs) < 1e-3) continue;
        REQUIRE(vpp == Approx(rhs).epsilon(0.01).margin(1e-4));
        ++checked;
    }
    REQUIRE(checked > 50);
}

TEST_CASE("far-field coefficient identities at random inputs") {
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> U(0.3, 2.5);
    for (int trial = 0; trial < 8; ++trial) {
        FarfieldCoeffs c;
        c.lambda = U(rng);
        c.m = trial % 2 ? 3 : 4;
        c.b0 = U(rng);
        c.c0 = U(rng) - 1.4;
        c.d0 = U(rng) - 1.4;
        c.a1 = U(rng) - 1.4;
        c.c1 = U(rng) - 1.4;
        const double L = c.lambda, b = c.b0, a1 = c.a1, c0 = c.c0, d0 = c.d0;
        const double d3 = c.m == 3 ? 1.0 : 0.0;
        REQUIRE(c.eta5() == Approx(3.0 * L * a1 * a1 / (2.0 * std::pow(b, 4))));
        REQUIRE(c.kappa2() == Approx(L * L * a1 * a1 / (12.0 * std::pow(b, 7))));
        REQUIRE(c.b1() == Approx(3.0 * a1 * c0 / (2.0 * b)));
        REQUIRE(c.eta4() ==
                Approx((6.0 * L * c0 * a1 * a1 + 4.0 * L * c.a2 * b * b) /
                       (4.0 * std::pow(b, 5))));
        REQUIRE(c.f1() ==
                Approx(-L *
                       (-36.0 * c0 * c0 * a1 * b + 72.0 * d0 * a1 * b * b -
                        24.0 * c.c1 * b * b * b - 25.0 * L * a1 + 36.0 * d3 * a1 * b * b) /
                       (288.0 * std::pow(b, 6))));
        REQUIRE(c.eta0() == Approx(L / (6.0 * b * b)));
        REQUIRE(c.gamma0() == Approx(L * L / (360.0 * std::pow(b, 5))));
    }
}

TEST_CASE("far-field series structure") {
    FarfieldCoeffs c;
    c.lambda = 1.0;
    c.b0 = 1.0;
    const double xi = 100.0;
    const double lead = c.b0 * xi * xi + c.eta0() * std::log(xi);
    REQUIRE(farfield_series(FarfieldTerm::v0, c, xi) ==
            Approx(lead).margin(0.1 * std::log(xi) / (xi * xi) * 100.0));
    REQUIRE_THROWS_AS(farfield_series(FarfieldTerm::v0, c, 0.5), std::domain_error);
}

TEST_CASE("fourth-order inner profile by shooting at lambda = 27") {
    const InnerProfile& pr = detail::cached_profile(Order::fourth, 27.0, 4);
    REQUIRE(pr.xi0 == Approx(-3.78086).margin(2e-4));
    REQUIRE(pr.xi0 == Approx(-3.77).margin(0.05));
    REQUIRE(pr.v_min == Approx(0.9032865).margin(1e-4));
    REQUIRE(pr.first_integral_residual < 1e-8);
    REQUIRE(pr.b0 == Approx(3.0).margin(1e-12));
    // translation removed: minimum of v at xi = 0
    REQUIRE(pr.eval(0.0) == Approx(pr.v_min).margin(1e-10));
    REQUIRE(std::abs(pr.trace.eval(0.0)[1]) < 1e-7);
    for (double v : pr.v) REQUIRE(v > 0.0);

    // computed tail vs the truncated v0 series over the matching window
    FarfieldCoeffs fc;
    fc.lambda = 27.0;
    fc.m = 4;
    fc.b0 = pr.b0;
    fc.c0 = pr.c0;
    fc.d0 = pr.d0;
    // the sampled trace ends at xi_max minus the min-centering shift; stay inside
    for (double xi = 0.6 * pr.xi_max; xi <= pr.trace.xs.back(); xi += 4.0) {
        const double v = pr.trace.eval(xi)[0];
        REQUIRE(v == Approx(farfield_series(FarfieldTerm::v0, fc, xi)).margin(1e-2));
    }
}

TEST_CASE("expansion coefficient relations, second order") {
    const ExpansionCoeffsL c = coeffs_laplacian(10.0, 4);
    REQUIRE(c.lambda0c == 0.75);
    REQUIRE(c.lambda1c == Approx(-2.0 * 0.75 * 0.75));
    REQUIRE(c.a_half == Approx(-0.75));
    REQUIRE(c.gamma == Approx(-0.3166426151).margin(1e-7));
    REQUIRE(c.a1 == Approx(0.5 * 0.75 * std::log(0.075) - c.gamma).margin(1e-12));
    REQUIRE(c.lambda2c == Approx(2.0 * c.a1 * 0.75).margin(1e-12));
}

TEST_CASE("expansion coefficient relations, fourth order") {
    const ExpansionCoeffsB c = coeffs_bilaplacian(27.0, 4);
    REQUIRE(c.lambda0c == 27.0);
    REQUIRE(c.alpha1 == Approx(-0.25));
    REQUIRE(c.alpha2 == Approx(1.0));
    REQUIRE(c.lambda2c == Approx(-4.5));
    REQUIRE(c.lambda1c == Approx(-18.0 * c.xi0).margin(1e-10));
    REQUIRE(c.beta1 == Approx(7.0 / 3.0 + c.xi0 * c.xi0 / 12.0).margin(1e-10));
    REQUIRE(c.b0 == Approx(3.0));
    REQUIRE(c.xi0 < 0.0);
}

TEST_CASE("contact point leading terms") {
    REQUIRE(contact_point_laplacian(10.0, 0.01, 4, 0.0, 1) ==
            Approx(1.0 - 0.1 * std::sqrt(0.075)).margin(1e-14));
    REQUIRE(contact_point_bilaplacian(50.0, 0.005, 4, 0.0, 1) ==
            Approx(1.0 - std::pow(0.54, 0.25) * std::pow(0.005, 0.25)).margin(1e-14));
    // corrections push x_c outward for gamma < 0 profiles at these parameters
    const double g = -0.3166426151;
    REQUIRE(contact_point_laplacian(10.0, 0.01, 4, g, 3) <
            contact_point_laplacian(10.0, 0.01, 4, g, 1));
}

TEST_CASE("norm formulas") {
    REQUIRE(norm_sq_laplacian(10.0, 0.01, 4) == Approx(1.9234851628).margin(1e-8));
    REQUIRE(norm_sq_laplacian(10.0, 0.0, 4) == 2.0);
    REQUIRE(norm_sq_bilaplacian(50.0, 0.0, 4) == 2.0);
    // outer-profile moments used by the bi-Laplacian norm
    auto w0 = [](double e) { return -1.0 + 3.0 * e * e - 2.0 * e * e * e; };
    REQUIRE(integrate([&](double e) { return w0(e) * w0(e); }, 0.0, 1.0, 1e-12) ==
            Approx(13.0 / 35.0).margin(1e-10));
    REQUIRE(integrate([&](double e) { return w0(e) * e * (e - 1.0) * (e - 1.0); },
                      0.0, 1.0, 1e-12) == Approx(-11.0 / 210.0).margin(1e-10));
}

TEST_CASE("asymptotic norm error decreases with eps") {
    // convergence-in-eps of the printed formula against the exact trapezoid
    // norm of the composite profile itself
    auto err = [](double eps) {
        Grid g(4001);
        const Field f = composite_laplacian(10.0, eps, 4, g);
        return std::abs(norm_sq(f) - norm_sq_laplacian(10.0, eps, 4));
    };
    // one decade of eps
    REQUIRE(err(0.0025) < err(0.025));
    REQUIRE(err(0.004) < err(0.04));
}

TEST_CASE("composite profiles") {
    Grid g(2001);
    const Field fl = composite_laplacian(10.0, 0.01, 4, g);
    // interior plateau pinned at -1+eps, symmetric by construction
    REQUIRE(fl.values[g.n / 2] == Approx(-1.0 + 0.01).margin(1e-10));
    for (int i = 0; i < g.n; ++i)
        REQUIRE(fl.values[i] == Approx(fl.values[g.n - 1 - i]).margin(1e-12));
    REQUIRE(fl.min() > -1.0);
    // boundary layer carries the profile back to O(h/sqrt(eps)) of zero
    REQUIRE(fl.values[g.n - 1] > -0.1);
    REQUIRE(fl.values[g.n - 1] < 0.05);

    const Field fb = composite_bilaplacian(27.0, 0.01, 4, g);
    REQUIRE(fb.values[g.n / 2] == Approx(-1.0 + 0.01).margin(1e-6));
    double xm, um;
    interior_min(fb, xm, um);
    // two-point dip near +-x_c with depth eps * v_min
    const double xc = 1.0 - std::pow(0.01, 0.25) *
                                (1.0 - coeffs_bilaplacian(27.0, 4).xi0 / 6.0 * 0.1);
    REQUIRE(std::abs(xm) == Approx(xc).margin(0.02));
    REQUIRE(um == Approx(-1.0 + 0.01 * 0.9032865).margin(5e-4));

    REQUIRE_THROWS_AS(
        composite_bilaplacian(27.0, 0.01, 4, inner_laplacian(10.0, 4), g),
        std::invalid_argument);
}
