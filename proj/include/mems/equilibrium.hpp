#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "operators.hpp"

namespace mems {

enum class StabilityHint { unknown, stable, unstable };

struct BranchPoint {
    double lambda = 0.0;
    double s = 0.0; // ||u||_2^2
    Field field;
    StabilityHint hint = StabilityHint::unknown;
};

struct Branch {
    double eps = 0.0;
    int m = 4;
    Order order = Order::second;
    std::vector<BranchPoint> points;
    bool truncated = false; // continuation ended before s_max (branch exhausted)
};

struct FoldSet {
    double eps = 0.0;
    double lambda_c1 = 0.0;
    std::optional<double> lambda_c2;
};

namespace detail {

// Residuals of the equilibrium system, R_i = s_e (L u)_i - force(u_i).
inline std::vector<double> equilibrium_residual(const Field& f, const LinearOperator& op,
                                                const ModelParams& p) {
    std::vector<double> r = op.apply(f.values);
    const double se = op.elastic_sign();
    for (int i = 0; i < f.n(); ++i) r[i] = se * r[i] - force(f.values[i], p);
    return r;
}

// Residual magnitudes are judged relative to the operator scale: 1/h^4 for
// the biharmonic makes absolute 1e-10 unreachable in double precision.
inline double residual_scale(const Field& f, const LinearOperator& op,
                             const ModelParams& p) {
    const auto Lu = op.apply(f.values);
    double s = 1.0;
    for (int i = 0; i < f.n(); ++i)
        s = std::max(s, std::abs(Lu[i]) + std::abs(force(f.values[i], p)));
    return s;
}

// Cancellation floor of the stencil application: the residual cannot drop
// below roundoff of the largest terms the stencil subtracts, which reaches
// eps_mach |u| / h^4 for the biharmonic rows.
inline double roundoff_floor(const Field& f, const LinearOperator& op) {
    const Banded& B = op.band;
    double mx = 0.0;
    for (int i = 0; i < f.n(); ++i) {
        double s = 0.0;
        for (int j = std::max(0, i - B.ku); j <= std::min(f.n() - 1, i + B.ku); ++j)
            s += std::abs(B.at(i, j) * f.values[j]);
        mx = std::max(mx, s);
    }
    return std::numeric_limits<double>::epsilon() * mx;
}

} // namespace detail

// Scaled equilibrium residual, for external verification of branch points.
inline double check_residual(const Field& f, const LinearOperator& op,
                             const ModelParams& p) {
    const auto r = detail::equilibrium_residual(f, op, p);
    double mx = 0.0;
    for (double v : r) mx = std::max(mx, std::abs(v));
    return mx / detail::residual_scale(f, op, p);
}

// Sign of the smallest eigenvalue of the linearization -(s_e L - diag(f'))
// by counting negative pivots of an unpivoted LDL^T sweep (Sylvester's law);
// the matrix is symmetric banded.
inline StabilityHint stability_hint(const Field& f, const LinearOperator& op,
                                    const ModelParams& p) {
    Banded S = op.stiffness();
    for (int i = 0; i < f.n(); ++i) S.at(i, i) += dforce_du(f.values[i], p);
    const int n = S.n, kl = S.kl;
    int negatives = 0;
    for (int j = 0; j < n; ++j) {
        const double d = S.at(j, j);
        if (d == 0.0) return StabilityHint::unknown;
        if (d < 0.0) ++negatives;
        const int ilast = std::min(n - 1, j + kl);
        for (int i = j + 1; i <= ilast; ++i) {
            const double l = S.at(i, j) / d;
            for (int k = j + 1; k <= ilast; ++k) S.at(i, k) -= l * S.at(j, k);
        }
    }
    return negatives == 0 ? StabilityHint::stable : StabilityHint::unstable;
}

// Newton on the augmented system {s_e L u - force(u; lambda) = 0,
// ||u||_2^2 = s_target} for unknowns (u, lambda), via banded core plus a
// one-column/one-row border eliminated by block factorization.
inline BranchPoint solve_at_norm(const LinearOperator& op, const ModelParams& base,
                                 double s_target, const BranchPoint& init,
                                 double newton_tol = 1e-10, int max_iter = 50) {
    const int n = init.field.n();
    const double h = init.field.grid.h;
    const double se = op.elastic_sign();
    Field u = init.field;
    double lambda = init.lambda;

    for (int it = 0; it < max_iter; ++it) {
        ModelParams p = base;
        p.lambda = lambda;
        auto R = detail::equilibrium_residual(u, op, p);
        double s = 0.0;
        for (double v : u.values) s += v * v;
        s *= h;
        const double Rn = s - s_target;
        double mx = 0.0;
        for (double v : R) mx = std::max(mx, std::abs(v));
        const double tol_eff = newton_tol * detail::residual_scale(u, op, p) +
                               10.0 * detail::roundoff_floor(u, op);
        if (mx <= tol_eff && std::abs(Rn) <= newton_tol * std::max(1.0, s_target)) {
            BranchPoint out{lambda, s, u, StabilityHint::unknown};
            return out;
        }

        Banded A = op.band;
        if (se < 0) for (double& v : A.a) v = -v;
        std::vector<double> Bcol(n), Crow(n), rhs(n);
        for (int i = 0; i < n; ++i) {
            A.at(i, i) -= dforce_du(u.values[i], p);
            Bcol[i] = -force_unit(u.values[i], p);
            Crow[i] = 2.0 * h * u.values[i];
            rhs[i] = -R[i];
        }
        BandedLU lu(std::move(A));
        if (lu.singular)
            throw NoConvergence("solve_at_norm: singular core matrix");
        BorderedSolver bs(lu, {Bcol});
        std::vector<double> d;
        try {
            d = bs.solve({Crow}, {{0.0}}, rhs, {-Rn});
        } catch (const std::exception&) {
            throw NoConvergence("solve_at_norm: bordered solve failed");
        }
        // keep the gap open: damp the step if it would close 1+u
        double t = 1.0;
        for (int bt = 0; bt < 40; ++bt) {
            bool ok = true;
            for (int i = 0; i < n; ++i)
                if (u.values[i] + t * d[i] <= -1.0) { ok = false; break; }
            if (ok) break;
            t *= 0.5;
        }
        for (int i = 0; i < n; ++i) u.values[i] += t * d[i];
        lambda += t * d[n];
    }
    throw NoConvergence("solve_at_norm: max_iter exceeded");
}

// Newton at fixed lambda (used to polish asymptotic seeds into PDE equilibria).
inline Field solve_at_lambda(const LinearOperator& op, const ModelParams& p,
                             const Field& init, double newton_tol = 1e-10,
                             int max_iter = 60) {
    const int n = init.n();
    const double se = op.elastic_sign();
    Field u = init;
    for (int it = 0; it < max_iter; ++it) {
        auto R = detail::equilibrium_residual(u, op, p);
        double mx = 0.0;
        for (double v : R) mx = std::max(mx, std::abs(v));
        if (mx <= newton_tol * detail::residual_scale(u, op, p) +
                      10.0 * detail::roundoff_floor(u, op))
            return u;
        Banded A = op.band;
        if (se < 0) for (double& v : A.a) v = -v;
        std::vector<double> rhs(n);
        for (int i = 0; i < n; ++i) {
            A.at(i, i) -= dforce_du(u.values[i], p);
            rhs[i] = -R[i];
        }
        BandedLU lu(std::move(A));
        if (lu.singular)
            throw NoConvergence("solve_at_lambda: singular Jacobian");
        auto d = lu.solve(std::move(rhs));
        double t = 1.0;
        for (int bt = 0; bt < 40; ++bt) {
            bool ok = true;
            for (int i = 0; i < n; ++i)
                if (u.values[i] + t * d[i] <= -1.0) { ok = false; break; }
            if (ok) break;
            t *= 0.5;
        }
        // when the transition layer is subgrid, full steps can cycle between
        // nodal configurations; backtrack on |R|_2^2, for which the Newton
        // direction is always a descent direction
        double r2 = 0.0;
        for (double v : R) r2 += v * v;
        Field trial = u;
        for (int bt = 0; bt < 40; ++bt) {
            for (int i = 0; i < n; ++i) trial.values[i] = u.values[i] + t * d[i];
            auto Rt = detail::equilibrium_residual(trial, op, p);
            double r2t = 0.0;
            for (double v : Rt) r2t += v * v;
            if (r2t <= r2 * (1.0 - 1e-4 * t)) break;
            t *= 0.5;
        }
        for (int i = 0; i < n; ++i) u.values[i] += t * d[i];
    }
    throw NoConvergence("solve_at_lambda: max_iter exceeded");
}

struct TraceOptions {
    double s_max = 1.9;
    double ds0 = 0.02;
    int n = 0;               // 0: default resolution for (order, eps)
    double newton_tol = 1e-10;
    bool stability = false;  // annotate points with the LDL^T sign check
};

inline Branch trace_branch(double eps, int m, Order order, const TraceOptions& opt = {}) {
    ModelParams base;
    base.lambda = 1.0;
    base.eps = eps;
    base.m = m;
    base.order = order;
    base.validate();

    const int n = opt.n > 0 ? opt.n : default_grid_n(order, eps);
    const Grid grid(n);
    const LinearOperator op = build_elastic(order, grid);
    const double em2 = detail::ipow(eps, m - 2);

    Branch br;
    br.eps = eps;
    br.m = m;
    br.order = order;
    br.points.push_back({0.0, 0.0, Field(grid), StabilityHint::unknown});

    double ds = opt.ds0;
    int successes = 0;
    while (br.points.back().s < opt.s_max) {
        const double s_t = std::min(br.points.back().s + ds, opt.s_max);
        BranchPoint pred;
        const auto& pts = br.points;
        if (pts.size() == 1) {
            // linearized first step: s_e L u = lambda (1 - eps^{m-2}), so the
            // predictor direction is w = (s_e L)^{-1} 1 scaled to the norm
            Banded A = op.band;
            if (op.elastic_sign() < 0) for (double& v : A.a) v = -v;
            BandedLU lu(std::move(A));
            std::vector<double> ones(n, 1.0 - em2);
            auto w = lu.solve(std::move(ones));
            double nw = 0.0;
            for (double v : w) nw += v * v;
            nw = std::sqrt(grid.h * nw);
            const double lam = std::sqrt(s_t) / nw;
            pred.lambda = lam;
            pred.field = Field(grid);
            for (int i = 0; i < n; ++i) pred.field.values[i] = lam * w[i];
        } else {
            const auto& p1 = pts[pts.size() - 1];
            const auto& p0 = pts[pts.size() - 2];
            const double fac = (s_t - p1.s) / (p1.s - p0.s);
            pred.lambda = p1.lambda + fac * (p1.lambda - p0.lambda);
            pred.field = p1.field;
            for (int i = 0; i < n; ++i)
                pred.field.values[i] += fac * (p1.field.values[i] - p0.field.values[i]);
            for (int i = 0; i < n; ++i)
                if (pred.field.values[i] <= -1.0)
                    pred.field.values[i] = -1.0 + 0.5 * (1.0 + p1.field.values[i]);
        }
        try {
            BranchPoint pt = solve_at_norm(op, base, s_t, pred, opt.newton_tol);
            // nontrivial equilibria have lambda > 0; a nonpositive value means
            // the predictor overshot a sharp fold onto a spurious root
            if (pt.lambda <= 0.0) throw NoConvergence("nonpositive lambda");
            if (opt.stability) {
                ModelParams p = base;
                p.lambda = pt.lambda;
                pt.hint = stability_hint(pt.field, op, p);
            }
            br.points.push_back(std::move(pt));
            if (++successes >= 3) {
                ds = std::min(ds * 1.3, opt.ds0);
                successes = 0;
            }
            // the eps=0 branch terminates at the touchdown profile; stop
            // cleanly once the gap is numerically closed
            if (eps == 0.0 && br.points.back().field.min() < -0.998) {
                br.truncated = true;
                break;
            }
        } catch (const NoConvergence&) {
            successes = 0;
            ds *= 0.5;
            if (ds < opt.ds0 * 1e-10) {
                if (br.points.size() >= 3) {
                    br.truncated = true;
                    break;
                }
                throw;
            }
        }
    }
    return br;
}

// Interior extrema of lambda(s) refined by a local quadratic fit.
namespace detail {

// Continuation loses reliability once the norm nears the saturation value
// 2 (1-eps)^2 where lambda blows up along the obstacle-hugging profile;
// points past 95% of it can carry spurious lambda wiggles.
inline int fold_scan_end(const Branch& br) {
    const double s_cut = 0.95 * 2.0 * (1.0 - br.eps) * (1.0 - br.eps);
    int np = (int)br.points.size();
    while (np > 3 && br.points[np - 1].s > s_cut) --np;
    return np;
}

} // namespace detail

inline FoldSet find_folds(const Branch& br) {
    const auto& pts = br.points;
    if (pts.size() < 3)
        throw std::invalid_argument("find_folds: branch too short");
    const int np = detail::fold_scan_end(br);
    FoldSet out;
    out.eps = br.eps;
    auto refine = [&](int i) {
        const double s0 = pts[i - 1].s, s1 = pts[i].s, s2 = pts[i + 1].s;
        const double l0_ = pts[i - 1].lambda, l1 = pts[i].lambda, l2 = pts[i + 1].lambda;
        // quadratic through three (s, lambda) points; extremum value
        const double d0 = (l1 - l0_) / (s1 - s0), d1 = (l2 - l1) / (s2 - s1);
        const double c2 = (d1 - d0) / (s2 - s0);
        if (c2 == 0.0) return l1;
        const double sv = 0.5 * (s0 + s1) - 0.5 * d0 / c2;
        return l0_ + d0 * (sv - s0) + c2 * (sv - s0) * (sv - s1);
    };
    int imax = -1;
    for (int i = 1; i + 1 < np; ++i)
        if (pts[i].lambda > pts[i - 1].lambda && pts[i].lambda > pts[i + 1].lambda) {
            imax = i;
            out.lambda_c1 = refine(i);
            break;
        }
    if (imax < 0) {
        // monotone branch: no interior fold
        out.lambda_c1 = pts[np - 1].lambda;
        return out;
    }
    for (int i = imax + 1; i + 1 < np; ++i)
        if (pts[i].lambda < pts[i - 1].lambda && pts[i].lambda < pts[i + 1].lambda) {
            const double v = refine(i);
            // a genuine second fold sits strictly between 0 and the first
            if (v > 0.0 && v < out.lambda_c1) out.lambda_c2 = v;
            break;
        }
    return out;
}

inline bool has_two_folds(double eps, int m, Order order, const TraceOptions& opt = {}) {
    Branch br = trace_branch(eps, m, order, opt);
    if (br.points.size() < 3) return false;
    FoldSet f = find_folds(br);
    // a genuine first fold must be interior (lambda drops after it)
    const int np = detail::fold_scan_end(br);
    bool interior_max = false;
    for (int i = 1; i + 1 < np; ++i)
        if (br.points[i].lambda > br.points[i - 1].lambda &&
            br.points[i].lambda > br.points[i + 1].lambda) {
            interior_max = true;
            break;
        }
    return interior_max && f.lambda_c2.has_value();
}

// Bisection on eps for the two-fold/no-fold boundary (fold merging point).
inline double find_eps_c(int m, Order order, const TraceOptions& opt = {}) {
    double lo = 0.02, hi = 0.3;
    if (!has_two_folds(lo, m, order, opt)) {
        bool found = false;
        for (double cand : {0.01, 0.005, 0.002}) {
            if (has_two_folds(cand, m, order, opt)) { hi = lo; lo = cand; found = true; break; }
        }
        if (!found)
            throw BracketFailure("find_eps_c: no two-fold regime in (1e-3, 0.5)");
    } else if (has_two_folds(hi, m, order, opt)) {
        bool found = false;
        for (double cand : {0.4, 0.49}) {
            if (!has_two_folds(cand, m, order, opt)) { lo = hi; hi = cand; found = true; break; }
        }
        if (!found)
            throw BracketFailure("find_eps_c: no fold-free regime in (1e-3, 0.5)");
    }
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        (has_two_folds(mid, m, order, opt) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct FoldSample {
    double eps;
    double lambda_c2;
};

inline std::vector<FoldSample> fold_scaling(Order order, int m,
                                            const std::vector<double>& eps_list,
                                            const TraceOptions& base_opt = {}) {
    std::vector<FoldSample> out;
    for (double eps : eps_list) {
        TraceOptions opt = base_opt;
        if (opt.n == 0) {
            // second folds sit at small norms with thin layers; resolve harder
            const double w = order == Order::second ? eps : std::pow(eps, 0.75);
            opt.n = std::max(512, (int)std::ceil(16.0 / w));
        }
        Branch br = trace_branch(eps, m, order, opt);
        FoldSet f = find_folds(br);
        if (!f.lambda_c2)
            throw NoConvergence("fold_scaling: second fold absent at eps=" + std::to_string(eps));
        out.push_back({eps, *f.lambda_c2});
    }
    return out;
}

} // namespace mems
