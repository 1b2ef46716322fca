#pragma once

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace mems {

// Critical boundary-layer eigenvalue of the matched expansion.
inline double lambda0c_of(Order order, int m) {
    return order == Order::second ? (m - 1.0) / (2.0 * (m - 2.0))
                                  : 18.0 * (m - 1.0) / (m - 2.0);
}

// --- far-field series of the fourth-order inner profile ---------------------

enum class FarfieldTerm { v0, v1, v2 };

// Coefficient set of the truncated far-field series v = v0 + e^{1/2} v1 + e v2.
// Constants the matching leaves free (c1, d1, gamma1, g1, a2, c2, d2, gamma2,
// g2) are plain inputs; everything else is derived from them.
struct FarfieldCoeffs {
    double lambda = 1.0;
    int m = 4;
    double b0 = 1.0, c0 = 0.0, d0 = 0.0;
    double a1 = 0.0, c1 = 0.0, d1 = 0.0, gamma1 = 0.0, g1 = 0.0;
    double a2 = 0.0, c2 = 0.0, d2 = 0.0, gamma2 = 0.0, g2 = 0.0;

    double delta3() const { return m == 3 ? 1.0 : 0.0; }
    double p(int k) const { return detail::ipow(b0, k); }

    // v0 tail
    double eta0() const { return lambda / (6.0 * b0 * b0); }
    double gamma0() const { return lambda * lambda / (360.0 * p(5)); }
    double f0() const { return lambda * c0 / (12.0 * p(3)); }
    double g0() const {
        return lambda * (77.0 * lambda - 540.0 * c0 * c0 * b0 +
                         180.0 * delta3() * b0 * b0 + 360.0 * b0 * b0 * d0) /
               (21600.0 * p(5));
    }
    // v1 tail
    double b1() const { return 1.5 * a1 * c0 / b0; }
    double eta1() const { return lambda * c0 * a1 / (2.0 * p(4)); }       // log xi
    double mu1() const { return lambda * a1 / p(3); }                     // xi log xi
    double phi1() const { return lambda * lambda * a1 / (24.0 * p(6)); }  // log xi / xi
    double f1() const {
        return -lambda *
               (-36.0 * c0 * c0 * a1 * b0 + 72.0 * d0 * a1 * b0 * b0 -
                24.0 * c1 * p(3) - 25.0 * lambda * a1 +
                36.0 * delta3() * a1 * b0 * b0) /
               (288.0 * p(6));
    }
    // v2 tail
    double kappa2() const { return lambda * lambda * a1 * a1 / (12.0 * p(7)); }
    double eta3() const {
        return lambda *
               (-18.0 * delta3() * a1 * a1 * b0 * b0 + 16.0 * lambda * a1 * a1 +
                9.0 * a2 * c0 * p(3) + 9.0 * a1 * a1 * c0 * c0 * b0 -
                36.0 * a1 * a1 * b0 * b0 * d0 + 9.0 * a1 * c1 * p(3)) /
               (18.0 * p(7));
    }
    double eta4() const {
        return (6.0 * lambda * c0 * a1 * a1 + 4.0 * lambda * a2 * b0 * b0) / (4.0 * p(5));
    }
    double eta5() const { return 3.0 * lambda * a1 * a1 / (2.0 * p(4)); }
    double b2() const {
        return -(14.0 * lambda * a1 * a1 - 12.0 * a2 * c0 * p(3) +
                 9.0 * a1 * a1 * c0 * c0 * b0 - 12.0 * a1 * c1 * p(3)) /
               (8.0 * p(4));
    }
    double phi2() const {
        return -(-4.0 * lambda * lambda * a2 * b0 * b0 +
                 7.0 * lambda * lambda * c0 * a1 * a1 + 720.0 * a1 * gamma1 * p(7)) /
               (96.0 * p(8));
    }
    double f2() const {
        return lambda * c0 *
                   (36.0 * c0 * c0 * b0 + 341.0 * lambda - 72.0 * b0 * b0 * d0 -
                    36.0 * delta3() * b0 * b0) *
                   a1 * a1 / (1152.0 * p(8)) -
               (lambda * c0 * c1 + lambda * d1 * b0 + 60.0 * g1 * p(4) +
                48.0 * gamma1 * p(4)) *
                   a1 / (8.0 * p(5)) +
               lambda *
                   (-72.0 * b0 * b0 * d0 + 25.0 * lambda + 36.0 * c0 * c0 * b0 -
                    36.0 * delta3() * b0 * b0) *
                   a2 / (288.0 * p(6)) +
               lambda * c2 / (12.0 * p(3));
    }
};

inline double farfield_series(FarfieldTerm t, const FarfieldCoeffs& c, double xi) {
    if (xi <= 1.0)
        throw std::domain_error("farfield_series: asymptotic regime needs xi > 1");
    const double L = std::log(xi), x2 = xi * xi;
    switch (t) {
    case FarfieldTerm::v0:
        return c.b0 * x2 + c.c0 * xi + c.d0 + c.eta0() * L + c.gamma0() * L / x2 +
               c.f0() / xi + c.g0() / x2;
    case FarfieldTerm::v1:
        return c.a1 * x2 * xi + c.b1() * x2 + c.c1 * xi + c.d1 + c.eta1() * L +
               c.mu1() * xi * L + c.phi1() * L / xi + c.gamma1 * L / x2 +
               c.f1() / xi + c.g1 / x2;
    case FarfieldTerm::v2:
        return c.a2 * x2 * xi + c.b2() * x2 + c.c2 * xi + c.d2 + c.kappa2() * L * L +
               c.eta3() * L + c.eta4() * xi * L + c.eta5() * x2 * L +
               c.phi2() * L / xi + c.gamma2 * L / x2 + c.f2() / xi + c.g2 / x2;
    }
    return 0.0;
}

// --- inner transition-layer profiles ----------------------------------------

struct InnerProfile {
    Order order = Order::second;
    double lambda = 0.0;
    int m = 4;
    std::vector<double> xi, v;  // sampled profile, min-at-zero normalization
    double xi_max = 0.0;

    double gamma = 0.0;                          // second-order far-field constant
    double b0 = 0.0, c0 = 0.0, d0 = 0.0, xi0 = 0.0;  // fourth-order constants
    double v_min = 1.0;
    double first_integral_residual = 0.0;        // fourth-order diagnostic

    OdeTrace trace;  // full state on the translated grid, for interpolation
    // left-tail linearization parameters (decay rate; oscillation for fourth order)
    double tail_a = 0.0, tail_delta = 0.0, tail_theta = 0.0, tail_shift = 0.0;

    double eval(double s) const {
        if (s < trace.xs.front()) {
            if (order == Order::second)
                return 1.0 + (trace.ys.front()[0] - 1.0) *
                                 std::exp(tail_a * (s - trace.xs.front()));
            const double x = s + tail_shift;
            return 1.0 + tail_delta * std::exp(tail_a * x) * std::cos(tail_a * x + tail_theta);
        }
        if (s > trace.xs.back()) {
            if (order == Order::second) {
                const double A = std::sqrt(2.0 * lambda * (m - 2) / (m - 1.0));
                return A * s - lambda0c_of(Order::second, m) * std::log(s) + gamma;
            }
            FarfieldCoeffs c;
            c.lambda = lambda; c.m = m; c.b0 = b0; c.c0 = c0; c.d0 = d0;
            return farfield_series(FarfieldTerm::v0, c, s);
        }
        return trace.eval(s)[0];
    }
};

namespace detail {

// (m-2)v^{m-1} - (m-1)v^{m-2} + 1 = (v-1)^2 Q(v); Q by exact synthetic
// deflation so the double root at v=1 never causes cancellation.
inline std::vector<double> manifold_poly(int m) {
    std::vector<double> a(m, 0.0);  // descending powers, degree m-1
    a[0] = m - 2.0;
    a[1] = -(m - 1.0);
    a[m - 1] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> b(a.size() - 1);
        b[0] = a[0];
        for (size_t i = 1; i < b.size(); ++i) b[i] = a[i] + b[i - 1];
        a = std::move(b);
    }
    return a;
}

inline double horner(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (double ci : c) r = r * x + ci;
    return r;
}

} // namespace detail

// Second-order inner profile on the unstable manifold of v=1. The first
// integral gives v' = W(v) >= 1 exactly; the translation is fixed by v(0) at
// the inflection value v* = (m/2)^{1/(m-2)} where v'' is maximal, matching the
// convention that the contact point sits at the maximum of u''. gamma is the
// O(1) far-field constant, extracted from a tail-subtracted quadrature with
// Richardson elimination of the 1/V^2 truncation error.
inline InnerProfile inner_laplacian(double lambda, int m, double xi_max = 80.0) {
    if (lambda <= 0.0 || m < 3)
        throw std::invalid_argument("inner_laplacian: need lambda > 0, m >= 3");
    const double beta = lambda0c_of(Order::second, m);
    const double A = std::sqrt(2.0 * lambda * (m - 2) / (m - 1.0));
    const double vstar = std::pow(0.5 * m, 1.0 / (m - 2));
    const auto Q = detail::manifold_poly(m);
    auto W = [&](double v) {
        return (v - 1.0) * std::sqrt(2.0 * lambda * detail::horner(Q, v) /
                                     ((m - 1.0) * detail::ipow(v, m - 1)));
    };

    // gamma = -beta log A + v* + beta log v* - c2/v* - I(inf), where I has the
    // 1/w and 1/w^2 parts of A/W subtracted; the far part integrates in t=1/w.
    const double b = (m - 1.0) / (m - 2.0);
    const double c2 = 3.0 * b * b / 8.0 - (m == 3 ? 1.0 / (2.0 * (m - 2)) : 0.0);
    auto integrand = [&](double w) {
        return A / W(w) - 1.0 - beta / w - c2 / (w * w);
    };
    auto I = [&](double V) {
        const double w1 = std::min(V, std::max(10.0, 2.0 * vstar));
        double r = integrate(integrand, vstar, w1, 1e-12);
        if (V > w1)
            r += integrate([&](double t) { return integrand(1.0 / t) / (t * t); },
                           1.0 / V, 1.0 / w1, 1e-12);
        return r;
    };
    auto gamma_raw = [&](double V) {
        return -beta * std::log(A) + vstar + beta * std::log(vstar) - c2 / vstar - I(V);
    };
    auto gamma_est = [&](double X) {
        return (4.0 * gamma_raw(2.0 * A * X) - gamma_raw(A * X)) / 3.0;
    };
    const double g_here = gamma_est(xi_max), g_far = gamma_est(2.0 * xi_max);
    if (std::abs(g_here - g_far) > 1e-6)
        throw ConvergenceFailure("inner_laplacian: gamma estimate not converged in xi_max");

    InnerProfile pr;
    pr.order = Order::second;
    pr.lambda = lambda;
    pr.m = m;
    pr.xi_max = xi_max;
    pr.gamma = g_here;
    pr.tail_a = std::sqrt(lambda * (m - 2));

    auto fwd = [&](double, const std::vector<double>& y) {
        return std::vector<double>{W(y[0])};
    };
    auto bwd = [&](double, const std::vector<double>& y) {
        return std::vector<double>{-W(y[0])};
    };
    auto never = [](double, const std::vector<double>&) { return false; };
    OdeTrace right = rk45(fwd, 0.0, xi_max, {vstar}, 1e-12, 1e-14, 0.5, never);
    OdeTrace left = rk45(bwd, 0.0, 60.0 / pr.tail_a + 20.0, {vstar}, 1e-12, 1e-14, 0.5,
                         [](double, const std::vector<double>& y) { return y[0] < 1.0 + 1e-12; });
    for (int i = (int)left.xs.size() - 1; i >= 1; --i) {
        pr.trace.xs.push_back(-left.xs[i]);
        pr.trace.ys.push_back(left.ys[i]);
        pr.trace.fs.push_back({-left.fs[i][0]});
    }
    for (size_t i = 0; i < right.xs.size(); ++i) {
        pr.trace.xs.push_back(right.xs[i]);
        pr.trace.ys.push_back(right.ys[i]);
        pr.trace.fs.push_back(right.fs[i]);
    }
    pr.xi.reserve(pr.trace.xs.size());
    pr.v.reserve(pr.trace.xs.size());
    for (size_t i = 0; i < pr.trace.xs.size(); ++i) {
        pr.xi.push_back(pr.trace.xs[i]);
        pr.v.push_back(pr.trace.ys[i][0]);
    }
    return pr;
}

namespace detail {

struct ShootOutcome {
    bool escaped = false;
    double a3 = -1e9;   // fitted cubic contamination; the shooting target
    double c0_raw = 0.0;
    OdeTrace tr;
};

// Integrate rightward from the unstable manifold of v=1, parametrized by the
// phase theta of the growing oscillatory mode, then least-squares fit
// F = v' - 2 b0 x - eta0/x over the far window against the series derivative
// basis; the coefficient of 3x^2 measures the cubic (off-family) mode.
inline ShootOutcome shoot_bilaplacian(double theta, double lambda, int m, double XI) {
    const double delta = 1e-8;
    const double a = std::pow(lambda * (m - 2), 0.25) / std::sqrt(2.0);
    auto f = [&](double, const std::vector<double>& y) {
        const double v = y[0];
        return std::vector<double>{
            y[1], y[2], y[3], -lambda * (1.0 / (v * v) - 1.0 / detail::ipow(v, m))};
    };
    const double ct = std::cos(theta), st = std::sin(theta);
    std::vector<double> y0 = {1.0 + delta * ct, delta * a * (ct - st),
                              -2.0 * delta * a * a * st,
                              -2.0 * delta * a * a * a * (st + ct)};
    ShootOutcome out;
    out.tr = rk45(f, 0.0, XI, y0, 1e-12, 1e-14, 0.5,
                  [](double, const std::vector<double>& y) { return y[0] < 0.2; });
    out.escaped = !out.tr.stopped;
    if (!out.escaped) return out;

    const double b0 = std::sqrt(lambda * (m - 2) / (2.0 * (m - 1.0)));
    const double eta0 = lambda / (6.0 * b0 * b0);
    std::vector<std::vector<double>> cols(6);
    std::vector<double> rhs;
    for (size_t i = 0; i < out.tr.xs.size(); ++i) {
        const double x = out.tr.xs[i];
        if (x < 0.4 * XI || x > 0.98 * XI) continue;
        const double L = std::log(x);
        cols[0].push_back(1.0);
        cols[1].push_back(3.0 * x * x);
        cols[2].push_back(1.0 / (x * x));
        cols[3].push_back((1.0 - 2.0 * L) / (x * x * x));
        cols[4].push_back((1.0 - 3.0 * L) / (x * x * x * x));
        cols[5].push_back(1.0 / (x * x * x * x));
        rhs.push_back(out.tr.ys[i][1] - 2.0 * b0 * x - eta0 / x);
    }
    const auto fit = lsq(cols, rhs);
    out.c0_raw = fit[0];
    out.a3 = fit[1];
    return out;
}

} // namespace detail

// Fourth-order inner profile by shooting along the two-parameter unstable
// manifold of v=1. One parameter is the translation (removed afterwards by
// placing min v at xi=0); the remaining phase theta is bisected so the fitted
// cubic far-field contamination vanishes, which selects the v0 family. A
// repeat at 2*xi_max guards the reported constants.
inline InnerProfile inner_bilaplacian_shoot(double lambda, int m, double xi_max = 80.0) {
    if (lambda <= 0.0 || m < 3)
        throw std::invalid_argument("inner_bilaplacian_shoot: need lambda > 0, m >= 3");
    const double b0 = std::sqrt(lambda * (m - 2) / (2.0 * (m - 1.0)));
    const double l0c = lambda0c_of(Order::fourth, m);

    struct Solved {
        double theta, tm, c0, d0, xi0, vmin, resid;
        detail::ShootOutcome best;
    };
    auto solve_at = [&](double XI, double th_lo, double th_hi) -> Solved {
        auto S = [&](double th) { return detail::shoot_bilaplacian(th, lambda, m, XI); };
        detail::ShootOutcome lo = S(th_lo), hi = S(th_hi);
        if (!lo.escaped || !hi.escaped || (lo.a3 > 0) == (hi.a3 > 0))
            throw BracketFailure("inner_bilaplacian_shoot: shooting bracket lost");
        double a = th_lo, b = th_hi, fa = lo.a3;
        detail::ShootOutcome best = std::abs(lo.a3) < std::abs(hi.a3) ? lo : hi;
        double th_best = std::abs(lo.a3) < std::abs(hi.a3) ? th_lo : th_hi;
        for (int it = 0; it < 64; ++it) {
            const double mth = 0.5 * (a + b);
            detail::ShootOutcome mo = S(mth);
            if (mo.escaped && std::abs(mo.a3) < std::abs(best.a3)) {
                best = mo;
                th_best = mth;
            }
            if ((mo.a3 > 0) == (fa > 0)) { a = mth; fa = mo.a3; }
            else b = mth;
        }

        Solved s;
        s.theta = th_best;
        s.best = std::move(best);
        const OdeTrace& tr = s.best.tr;
        // translation: global minimum of v located through the v' sign change
        size_t k = 0;
        for (size_t i = 0; i < tr.xs.size(); ++i)
            if (tr.ys[i][0] < tr.ys[k][0]) k = i;
        if (k == 0 || k + 1 >= tr.xs.size())
            throw ConvergenceFailure("inner_bilaplacian_shoot: no interior minimum");
        s.tm = bisect([&](double x) { return tr.eval(x)[1]; }, tr.xs[k - 1],
                      tr.xs[k + 1], 1e-13);
        s.vmin = tr.eval(s.tm)[0];
        s.c0 = s.best.c0_raw + 2.0 * b0 * s.tm;

        // d0: subtract the known series terms at the far nodes; g0 depends on
        // d0 itself, hence the short fixed-point iteration
        FarfieldCoeffs fc;
        fc.lambda = lambda; fc.m = m; fc.b0 = b0; fc.c0 = s.best.c0_raw; fc.d0 = 0.0;
        double d0_raw = 0.0;
        for (int it = 0; it < 6; ++it) {
            fc.d0 = d0_raw;
            double acc = 0.0;
            int cnt = 0;
            for (size_t i = 0; i < tr.xs.size(); ++i) {
                const double x = tr.xs[i];
                if (x < 0.6 * XI || x > 0.98 * XI) continue;
                acc += tr.ys[i][0] - (farfield_series(FarfieldTerm::v0, fc, x) - fc.d0);
                ++cnt;
            }
            d0_raw = acc / cnt;
        }
        s.d0 = d0_raw + b0 * s.tm * s.tm + s.best.c0_raw * s.tm;
        s.xi0 = s.c0 * std::pow(l0c / lambda, 0.25);

        const double C = lambda * (m - 2) / (m - 1.0);
        double resid = 0.0;
        for (size_t i = 0; i < tr.xs.size(); ++i) {
            const auto& y = tr.ys[i];
            const double E = -y[3] * y[1] + 0.5 * y[2] * y[2] + lambda / y[0] -
                             lambda / ((m - 1.0) * detail::ipow(y[0], m - 1)) - C;
            resid = std::max(resid, std::abs(E));
        }
        s.resid = resid;
        return s;
    };

    // cyclic scan for an escape-escape sign change of the fitted coefficient
    auto bracket = [&](double XI) -> std::pair<double, double> {
        const int N = 128;
        std::vector<double> th(N), a3(N);
        std::vector<char> esc(N);
        for (int i = 0; i < N; ++i) {
            th[i] = 2.0 * M_PI * i / N;
            auto o = detail::shoot_bilaplacian(th[i], lambda, m, XI);
            esc[i] = o.escaped;
            a3[i] = o.a3;
        }
        for (int i = 0; i < N; ++i) {
            const int j = (i + 1) % N;
            if (esc[i] && esc[j] && (a3[i] > 0) != (a3[j] > 0))
                return {th[i], th[i] + 2.0 * M_PI / N};
        }
        throw BracketFailure("inner_bilaplacian_shoot: no sign change in theta scan");
    };

    auto br = bracket(xi_max);
    Solved here = solve_at(xi_max, br.first, br.second);
    // stability of the reported constants under domain doubling; reuse the
    // found phase to avoid a second full scan
    Solved far = [&]() {
        try {
            return solve_at(2.0 * xi_max, here.theta - 0.02, here.theta + 0.02);
        } catch (const BracketFailure&) {
            auto b2 = bracket(2.0 * xi_max);
            return solve_at(2.0 * xi_max, b2.first, b2.second);
        }
    }();
    if (std::abs(here.xi0 - far.xi0) > 1e-3)
        throw ConvergenceFailure("inner_bilaplacian_shoot: xi0 not converged in xi_max");

    InnerProfile pr;
    pr.order = Order::fourth;
    pr.lambda = lambda;
    pr.m = m;
    pr.xi_max = xi_max;
    pr.b0 = b0;
    pr.c0 = here.c0;
    pr.d0 = here.d0;
    pr.xi0 = here.xi0;
    pr.v_min = here.vmin;
    pr.first_integral_residual = here.resid;
    pr.tail_a = std::pow(lambda * (m - 2), 0.25) / std::sqrt(2.0);
    pr.tail_delta = 1e-8;
    pr.tail_theta = here.theta;
    pr.tail_shift = here.tm;
    pr.trace = std::move(here.best.tr);
    for (double& x : pr.trace.xs) x -= here.tm;
    pr.xi.reserve(pr.trace.xs.size());
    pr.v.reserve(pr.trace.xs.size());
    for (size_t i = 0; i < pr.trace.xs.size(); ++i) {
        pr.xi.push_back(pr.trace.xs[i]);
        pr.v.push_back(pr.trace.ys[i][0]);
    }
    return pr;
}

namespace detail {

// gamma and xi0 are the expensive sub-computations; cache profiles per
// (order, lambda, m). Map nodes are never mutated after insertion, so the
// returned reference stays valid across concurrent inserts.
inline const InnerProfile& cached_profile(Order order, double lambda, int m) {
    static std::map<std::tuple<int, double, int>, InnerProfile> cache;
    static std::mutex mx;
    std::lock_guard<std::mutex> lk(mx);
    const auto key = std::make_tuple(order == Order::second ? 2 : 4, lambda, m);
    auto it = cache.find(key);
    if (it == cache.end()) {
        InnerProfile pr = order == Order::second ? inner_laplacian(lambda, m)
                                                 : inner_bilaplacian_shoot(lambda, m);
        it = cache.emplace(key, std::move(pr)).first;
    }
    return it->second;
}

} // namespace detail

// --- expansion coefficients and contact/norm formulas ------------------------

struct ExpansionCoeffsL {
    double lambda = 0.0;
    int m = 4;
    double lambda0c = 0.0, lambda1c = 0.0, lambda2c = 0.0;
    double a_half = 0.0, a1 = 0.0, gamma = 0.0;

    double xbar_c(double eps) const {
        const double lg = eps > 0.0 ? std::log(eps) : 0.0;
        return std::sqrt(lambda0c / lambda) * (1.0 - lambda0c * eps * lg + a1 * eps);
    }
};

inline ExpansionCoeffsL coeffs_laplacian(double lambda, int m) {
    ExpansionCoeffsL c;
    c.lambda = lambda;
    c.m = m;
    c.lambda0c = lambda0c_of(Order::second, m);
    c.lambda1c = -2.0 * c.lambda0c * c.lambda0c;
    c.a_half = -c.lambda0c;
    c.gamma = detail::cached_profile(Order::second, lambda, m).gamma;
    c.a1 = 0.5 * c.lambda0c * std::log(c.lambda0c / lambda) - c.gamma;
    c.lambda2c = 2.0 * c.a1 * c.lambda0c;
    return c;
}

struct ExpansionCoeffsB {
    double lambda = 0.0;
    int m = 4;
    double lambda0c = 0.0, lambda1c = 0.0, lambda2c = 0.0;
    double alpha1 = 0.0, alpha2 = 0.0, beta1 = 0.0;
    double xi0 = 0.0, b0 = 0.0;

    // c1 is left free by the matching; the c1-dependent refinements are
    // exposed as functions of it and excluded from the quantitative checks
    double beta2(double c1) const {
        return -xi0 * xi0 / 6.0 + std::pow(lambda0c / lambda, 0.25) * c1;
    }
    double lambda3c(double c1) const {
        return -28.0 / 243.0 * lambda0c * lambda0c +
               lambda0c * xi0 * xi0 / 18.0 - 5.0 / 729.0 * lambda0c -
               2.0 / 3.0 * std::pow(lambda0c / lambda, 0.25) * lambda0c * c1;
    }
    double xbar_c(double eps) const {
        return std::pow(lambda0c / lambda, 0.25) * (1.0 - xi0 / 6.0 * std::sqrt(eps));
    }
};

inline ExpansionCoeffsB coeffs_bilaplacian(double lambda, int m) {
    ExpansionCoeffsB c;
    c.lambda = lambda;
    c.m = m;
    c.lambda0c = lambda0c_of(Order::fourth, m);
    c.xi0 = detail::cached_profile(Order::fourth, lambda, m).xi0;
    c.lambda1c = -2.0 / 3.0 * c.xi0 * c.lambda0c;
    c.lambda2c = -c.lambda0c * c.lambda0c / 162.0;
    c.alpha1 = -c.lambda0c / 108.0;
    c.alpha2 = c.lambda0c / 27.0;
    c.beta1 = 7.0 / 81.0 * c.lambda0c + c.xi0 * c.xi0 / 12.0;
    c.b0 = 3.0 * std::sqrt(lambda / c.lambda0c);
    return c;
}

inline double contact_point_laplacian(double lambda, double eps, int m, double gamma,
                                      int terms = 3) {
    const double l0c = lambda0c_of(Order::second, m);
    double corr = 1.0;
    if (terms >= 2 && eps > 0.0) corr -= l0c * eps * std::log(eps);
    if (terms >= 3) corr += (0.5 * l0c * std::log(l0c / lambda) - gamma) * eps;
    return 1.0 - std::sqrt(eps) * std::sqrt(l0c / lambda) * corr;
}

inline double norm_sq_laplacian(double lambda, double eps, int m) {
    return 2.0 * (1.0 - 2.0 / 3.0 * std::sqrt((m - 1.0) / (2.0 * lambda * (m - 2))) *
                            std::sqrt(eps) -
                  2.0 * eps);
}

inline double contact_point_bilaplacian(double lambda, double eps, int m, double xi0,
                                        int terms = 2) {
    const double l0c = lambda0c_of(Order::fourth, m);
    double corr = 1.0;
    if (terms >= 2) corr -= xi0 / 6.0 * std::sqrt(eps);
    if (terms >= 3 && eps > 0.0) corr -= l0c / 648.0 * eps * std::log(eps);
    return 1.0 - std::pow(eps, 0.25) * std::pow(l0c / lambda, 0.25) * corr;
}

inline double norm_sq_bilaplacian(double lambda, double eps, int m) {
    return 2.0 * (1.0 - 22.0 / 35.0 *
                            std::pow(18.0 * (m - 1.0) / (lambda * (m - 2)), 0.25) *
                            std::pow(eps, 0.25));
}

// --- composite expansions ----------------------------------------------------

// Inner piece inside the contact point; inner + boundary layer - overlap in
// (x_c, 1], with the overlap being the inner far field rewritten in the outer
// variable (its eta-linear parts reproduce w's, so only the log and constant
// parts survive explicitly).
inline Field composite_laplacian(double lambda, double eps, int m, const Grid& g) {
    const InnerProfile& pr = detail::cached_profile(Order::second, lambda, m);
    const ExpansionCoeffsL c = coeffs_laplacian(lambda, m);
    const double A = std::sqrt(lambda / c.lambda0c);
    const double xbar = c.xbar_c(eps);
    const double xc = 1.0 - std::sqrt(eps) * xbar;
    const double e32 = std::pow(eps, 1.5), lg = std::log(eps);
    Field f(g);
    for (int i = 0; i < g.n; ++i) {
        const double ax = std::abs(g.x(i));
        const double xi = (ax - xc) / e32;
        if (ax <= xc) {
            f.values[i] = -1.0 + eps * pr.eval(xi);
        } else {
            const double eta = (ax - xc) / (std::sqrt(eps) * xbar);
            f.values[i] = -1.0 + eps * pr.eval(xi) - eps * A * xi + eta +
                          eps * lg * c.a_half * (eta - 1.0) + eps * c.a1 * (eta - 1.0) +
                          eps * c.lambda0c * std::log(xbar / eps) - eps * c.gamma;
        }
    }
    return f;
}

inline Field composite_bilaplacian(double lambda, double eps, int m,
                                   const InnerProfile& pr, const Grid& g) {
    if (pr.order != Order::fourth)
        throw std::invalid_argument("composite_bilaplacian: fourth-order profile required");
    const double l0c = lambda0c_of(Order::fourth, m);
    const double xbar = std::pow(l0c / lambda, 0.25) * (1.0 - pr.xi0 / 6.0 * std::sqrt(eps));
    const double xc = 1.0 - std::pow(eps, 0.25) * xbar;
    const double e34 = std::pow(eps, 0.75);
    Field f(g);
    for (int i = 0; i < g.n; ++i) {
        const double ax = std::abs(g.x(i));
        const double xi = (ax - xc) / e34;
        if (ax <= xc) {
            f.values[i] = -1.0 + eps * pr.eval(xi);
        } else {
            const double eta = (ax - xc) / (std::pow(eps, 0.25) * xbar);
            f.values[i] = eps * pr.eval(xi) - eps * (pr.b0 * xi * xi + pr.c0 * xi) +
                          (-1.0 + 3.0 * eta * eta - 2.0 * eta * eta * eta) +
                          std::sqrt(eps) * pr.xi0 * eta * (eta - 1.0) * (eta - 1.0);
        }
    }
    return f;
}

inline Field composite_bilaplacian(double lambda, double eps, int m, const Grid& g) {
    return composite_bilaplacian(lambda, eps, m,
                                 detail::cached_profile(Order::fourth, lambda, m), g);
}

} // namespace mems
