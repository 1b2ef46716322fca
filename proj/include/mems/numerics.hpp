#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mems {

// --- adaptive Simpson quadrature ------------------------------------------

namespace detail {
template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-10, int max_depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // tol is treated as relative to the first estimate (floor 1e-300 absolute)
    const double atol = std::max(std::abs(whole), 1e-3) * tol;
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, atol, max_depth);
}

// --- golden-section extremum ----------------------------------------------

template <class F>
double golden_max(const F& f, double a, double b, double xtol = 1e-12) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

template <class F>
double golden_min(const F& f, double a, double b, double xtol = 1e-12) {
    return golden_max([&](double x) { return -f(x); }, a, b, xtol);
}

// --- bisection root finding ------------------------------------------------

template <class F>
double bisect(const F& f, double a, double b, double xtol = 1e-13, int maxit = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("bisect: endpoints do not bracket a root");
    for (int i = 0; i < maxit && b - a > xtol; ++i) {
        const double m = 0.5 * (a + b), fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; }
        else { b = m; fb = fm; }
    }
    return 0.5 * (a + b);
}

// --- least squares ---------------------------------------------------------

struct LineFit { double slope, intercept; };

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = (int)x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double d = n * sxx - sx * sx;
    return {(n * sxy - sx * sy) / d, (sxx * sy - sx * sxy) / d};
}

// General linear least squares via normal equations; columns are basis
// evaluations. Fine for the handful of well-scaled columns used here.
inline std::vector<double> lsq(const std::vector<std::vector<double>>& cols,
                               const std::vector<double>& rhs) {
    const int q = (int)cols.size(), n = (int)rhs.size();
    std::vector<std::vector<double>> G(q, std::vector<double>(q));
    std::vector<double> g(q);
    for (int a = 0; a < q; ++a) {
        for (int b = a; b < q; ++b) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += cols[a][i] * cols[b][i];
            G[a][b] = G[b][a] = s;
        }
        double s = 0;
        for (int i = 0; i < n; ++i) s += cols[a][i] * rhs[i];
        g[a] = s;
    }
    // small dense Cholesky-free Gauss with pivoting
    for (int j = 0; j < q; ++j) {
        int p = j;
        for (int i = j + 1; i < q; ++i)
            if (std::abs(G[i][j]) > std::abs(G[p][j])) p = i;
        std::swap(G[j], G[p]); std::swap(g[j], g[p]);
        for (int i = j + 1; i < q; ++i) {
            const double l = G[i][j] / G[j][j];
            for (int k = j; k < q; ++k) G[i][k] -= l * G[j][k];
            g[i] -= l * g[j];
        }
    }
    std::vector<double> out(q);
    for (int i = q - 1; i >= 0; --i) {
        double s = g[i];
        for (int j = i + 1; j < q; ++j) s -= G[i][j] * out[j];
        out[i] = s / G[i][i];
    }
    return out;
}

// --- adaptive Dormand-Prince RK45 ------------------------------------------

struct OdeTrace {
    std::vector<double> xs;
    std::vector<std::vector<double>> ys;
    std::vector<std::vector<double>> fs; // derivatives at the nodes
    bool stopped = false;                // stop predicate fired

    // cubic Hermite evaluation between stored nodes
    std::vector<double> eval(double x) const {
        int lo = 0, hi = (int)xs.size() - 1;
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (xs[mid] <= x ? lo : hi) = mid;
        }
        const double h = xs[hi] - xs[lo], t = (x - xs[lo]) / h;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        std::vector<double> out(ys[lo].size());
        for (size_t k = 0; k < out.size(); ++k)
            out[k] = h00 * ys[lo][k] + h * h10 * fs[lo][k] +
                     h01 * ys[hi][k] + h * h11 * fs[hi][k];
        return out;
    }
};

template <class F, class Stop>
OdeTrace rk45(const F& f, double x0, double x1, std::vector<double> y,
              double rtol, double atol, double max_step, const Stop& stop) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const size_t d = y.size();
    OdeTrace tr;
    double x = x0, h = std::min(max_step, (x1 - x0) * 1e-3);
    std::vector<double> k1 = f(x, y), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), yt(d), y5(d);
    tr.xs.push_back(x); tr.ys.push_back(y); tr.fs.push_back(k1);
    int rejects_in_a_row = 0;
    while (x < x1) {
        h = std::min(h, x1 - x);
        for (size_t i = 0; i < d; ++i) yt[i] = y[i] + h * a21 * k1[i];
        k2 = f(x + c2 * h, yt);
        for (size_t i = 0; i < d; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(x + c3 * h, yt);
        for (size_t i = 0; i < d; ++i)
            yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(x + c4 * h, yt);
        for (size_t i = 0; i < d; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(x + c5 * h, yt);
        for (size_t i = 0; i < d; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = f(x + h, yt);
        for (size_t i = 0; i < d; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = f(x + h, y5);
        double err = 0.0;
        for (size_t i = 0; i < d; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        if (err <= 1.0) {
            x += h;
            y = y5;
            k1 = k7; // FSAL
            tr.xs.push_back(x); tr.ys.push_back(y); tr.fs.push_back(k1);
            rejects_in_a_row = 0;
            if (stop(x, y)) { tr.stopped = true; break; }
        } else if (++rejects_in_a_row > 60) {
            throw std::runtime_error("rk45: step size collapse");
        }
        const double fac = std::clamp(0.9 * std::pow(err > 0 ? err : 1e-10, -0.2), 0.2, 5.0);
        h = std::min(h * fac, max_step);
    }
    return tr;
}

} // namespace mems
