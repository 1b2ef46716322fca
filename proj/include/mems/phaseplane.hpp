#pragma once

#include <optional>
#include <vector>

#include "model.hpp"
#include "numerics.hpp"

namespace mems {

// Closed-form trajectory half-length of the unregularized problem.
inline double l0(double alpha) {
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::domain_error("l0: alpha must lie in (0,1]");
    const double r = std::sqrt(1.0 - alpha);
    return std::sqrt(0.5 * alpha) *
           (r + alpha * std::log(1.0 + r) - alpha * std::log(std::sqrt(alpha)));
}

// Trajectory half-length l_eps(alpha): integral of [2 P(u)]^{-1/2} from
// u = -1+alpha to 0. The endpoint inverse-square-root singularity is removed
// by u = -1+alpha+s^2, after which P = s^2 Q(s) with Q regular and positive;
// Q is assembled from the factored difference so no cancellation survives:
//   Q = 1/(alpha g) - eps^{m-2}/(m-1) * sum_{k=0}^{m-2} g^k alpha^{m-2-k}
//                      / (g alpha)^{m-1},   g = alpha + s^2.
inline double l_eps(double alpha, double eps, int m, double tol = 1e-9) {
    if (alpha <= eps || alpha > 1.0)
        throw std::domain_error("l_eps: need eps < alpha <= 1");
    if (alpha == 1.0) return 0.0;
    const double em2 = detail::ipow(eps, m - 2);
    auto Q = [&](double s) {
        const double g = alpha + s * s;
        double S = 0.0, gk = 1.0;
        const double am2 = detail::ipow(alpha, m - 2);
        double ak = am2; // alpha^{m-2-k}
        for (int k = 0; k <= m - 2; ++k) {
            S += gk * ak;
            gk *= g;
            ak /= alpha;
        }
        const double ga = g * alpha;
        return 1.0 / ga - em2 / (m - 1) * S / (detail::ipow(ga, m - 2) * ga);
    };
    auto f = [&](double s) { return std::sqrt(2.0 / Q(s)); };
    return integrate(f, 0.0, std::sqrt(1.0 - alpha), tol);
}

struct LengthCurve {
    double eps;
    int m;
    std::vector<double> alpha, l;
    double alpha_max = 0.0;                 // argmax of l (interior fold)
    std::optional<double> alpha_min;        // arg of interior local min
};

inline LengthCurve sample_length_curve(double eps, int m, int n_samples = 240) {
    if (n_samples < 200) n_samples = 200;
    LengthCurve c{eps, m, {}, {}};
    std::vector<double> as;
    if (eps == 0.0) {
        for (int i = 0; i < n_samples; ++i)
            as.push_back(1e-4 + (1.0 - 1e-4) * i / (n_samples - 1));
    } else {
        // uniform in alpha away from the divergence, log-uniform in
        // alpha-eps across three decades approaching it
        const int nu = (3 * n_samples) / 5, nl = n_samples - nu;
        const double a_sw = eps + 0.25 * (1.0 - eps);
        for (int i = 0; i < nl; ++i) {
            const double t = (double)i / (nl - 1); // t=0 closest to eps
            as.push_back(eps + (a_sw - eps) * std::pow(1e-3, 1.0 - t));
        }
        for (int i = 1; i <= nu; ++i)
            as.push_back(a_sw + (1.0 - a_sw) * i / (double)nu);
    }
    for (double a : as) {
        c.alpha.push_back(a);
        c.l.push_back(l_eps(a, eps, m));
    }
    const int n = (int)c.alpha.size();
    auto refine_max = [&](int i) {
        return golden_max([&](double a) { return l_eps(a, eps, m); },
                          c.alpha[i - 1], c.alpha[i + 1], 1e-10);
    };
    // interior local max with the largest alpha (the principal fold; the
    // divergence toward alpha -> eps+ is not a local max of the samples)
    int imax = -1;
    for (int i = n - 2; i >= 1; --i)
        if (c.l[i] > c.l[i - 1] && c.l[i] > c.l[i + 1]) { imax = i; break; }
    if (imax < 0)
        throw std::runtime_error("sample_length_curve: no interior maximum found");
    c.alpha_max = refine_max(imax);
    for (int i = imax - 1; i >= 1; --i)
        if (c.l[i] < c.l[i - 1] && c.l[i] < c.l[i + 1]) {
            c.alpha_min = golden_min([&](double a) { return l_eps(a, eps, m); },
                                     c.alpha[i - 1], c.alpha[i + 1], 1e-10);
            break;
        }
    return c;
}

struct PhaseFolds {
    double lambda_c1;
    std::optional<double> lambda_c2;
};

inline PhaseFolds fold_points_from_curve(const LengthCurve& c) {
    PhaseFolds f{0.0, std::nullopt};
    const double lmax = l_eps(c.alpha_max, c.eps, c.m);
    f.lambda_c1 = lmax * lmax;
    if (c.alpha_min) {
        const double lmin = l_eps(*c.alpha_min, c.eps, c.m);
        f.lambda_c2 = lmin * lmin;
    }
    return f;
}

// First-order fold expansion lambda_c + eps^{m-2} * (correction integral at
// the unperturbed alpha_c). The integrand's v^{-1/2} endpoint singularity is
// removed by v = s^2; ((1+v)^{m-1}-1)/v is expanded binomially.
inline double lambda_c1_expansion(double eps, int m) {
    const double ac = golden_max([](double a) { return l0(a); }, 0.2, 0.95, 1e-13);
    const double lc = l0(ac) * l0(ac);
    auto B = [&](double v) {
        double sum = 0.0, binom = 1.0, vk = 1.0;
        for (int k = 1; k <= m - 1; ++k) {
            binom = binom * (m - k) / k; // C(m-1,k)
            sum += binom * vk;
            vk *= v;
        }
        return sum / detail::ipow(1.0 + v, m - 2);
    };
    auto f = [&](double s) { return 2.0 * std::sqrt(1.0 + s * s) * B(s * s); };
    const double I = integrate(f, 0.0, std::sqrt(1.0 / ac - 1.0), 1e-11);
    const double coef = std::pow(ac, 3.5 - m) / (m - 1) * std::sqrt(0.5 * lc) * I;
    return lc + detail::ipow(eps, m - 2) * coef;
}

// Leading-order bounds (3.13) sandwiching the divergence of l_eps at
// alpha = eps(1+eta).
inline std::pair<double, double> divergence_bounds(double eta, double eps, int m) {
    const double lneta = std::log(eta);
    const double lower = -std::pow(eps, 1.5) * lneta / std::sqrt((double)(m - 2));
    const double upper = -std::sqrt(eps) / std::sqrt(2.0) *
                         std::sqrt((m - 1.0) / (m - 2.0)) * lneta;
    return {lower, upper};
}

} // namespace mems
