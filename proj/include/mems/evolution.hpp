#pragma once

#include <optional>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "operators.hpp"

namespace mems {

struct EvolveConfig {
    double dt0 = 1e-5;
    double t_end = 10.0;
    double steady_tol = 1e-8;       // on ||u_t||_inf
    double energy_tol_rel = 1e-10;  // allowed per-step energy increase, x |E|
    double record_every = 0.05;     // snapshot cadence in time units
    double dt_max = 1e-2;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    std::vector<double> energies;
    std::vector<std::optional<std::pair<double, double>>> fronts;
    std::optional<double> touchdown_time;
    std::optional<double> touchdown_x;
    bool steady = false;
    long steps = 0;
    double max_energy_increase = 0.0; // most positive accepted E-increment
};

// Outermost extent of the contiguous region where u < -1+2eps, by linear
// interpolation to the threshold (boundary nodes carry u=0).
inline std::optional<std::pair<double, double>>
detect_fronts(const Field& f, double eps) {
    const double th = -1.0 + 2.0 * eps;
    const int n = f.n();
    int il = -1, ir = -1;
    for (int i = 0; i < n; ++i)
        if (f.values[i] < th) { if (il < 0) il = i; ir = i; }
    if (il < 0) return std::nullopt;
    auto node = [&](int i) { return i < 0 || i >= n ? 0.0 : f.values[i]; };
    const double ul = node(il - 1), xl = f.grid.x(il);
    const double xleft = xl - f.grid.h * (th - f.values[il]) / (ul - f.values[il]);
    const double ur = node(ir + 1), xr = f.grid.x(ir);
    const double xright = xr + f.grid.h * (th - f.values[ir]) / (ur - f.values[ir]);
    return std::make_pair(xleft, xright);
}

namespace detail {

// One backward Euler step of size dt, no acceptance logic: solve
// z - u + dt (A z + force(z)) = 0 by damped Newton from z = u. The fully
// implicit force removes the eps^-3 stiffness near the flat region and, as a
// proximal step, keeps the discrete energy decreasing at step sizes the
// explicit and linearized variants reject near contact.
inline Field step_raw(const Field& f, const LinearOperator& op,
                      const ModelParams& p, double dt) {
    const int n = f.n();
    const Banded A = op.stiffness();
    std::vector<double> z = f.values;
    std::vector<double> res(n);
    auto residual = [&](const std::vector<double>& y, std::vector<double>& r) {
        r = A.apply(y);
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) {
            r[i] = y[i] - f.values[i] + dt * (r[i] + force(y[i], p));
            nrm = std::max(nrm, std::abs(r[i]));
        }
        return nrm;
    };
    double rn = residual(z, res);
    for (int it = 0; it < 40; ++it) {
        if (rn < 1e-12 * (1.0 + std::abs(dt)))
            return Field(f.grid, std::move(z));
        Banded M = A;
        for (double& v : M.a) v *= dt;
        for (int i = 0; i < n; ++i) M.at(i, i) += 1.0 + dt * dforce_du(z[i], p);
        BandedLU lu(std::move(M));
        const std::vector<double> dz = lu.solve(res);
        // damp to keep u > -1 and the residual from growing
        double a = 1.0;
        std::vector<double> zt(n);
        for (int cut = 0; cut < 30; ++cut, a *= 0.5) {
            bool feasible = true;
            for (int i = 0; i < n; ++i) {
                zt[i] = z[i] - a * dz[i];
                if (!(zt[i] > -1.0)) { feasible = false; break; }
            }
            if (!feasible) continue;
            std::vector<double> rt(n);
            const double rt_n = residual(zt, rt);
            if (rt_n < rn || rt_n < 1e-12 * (1.0 + std::abs(dt))) {
                z.swap(zt);
                res.swap(rt);
                rn = rt_n;
                a = -1.0;
                break;
            }
        }
        if (a > 0.0) throw NoConvergence("step_raw: Newton stalled");
    }
    if (rn < 1e-9 * (1.0 + std::abs(dt))) return Field(f.grid, std::move(z));
    throw NoConvergence("step_raw: Newton did not converge");
}

} // namespace detail

// One accepted step: tries dt, halving on violation of min(u) > -1 or of the
// energy gate, until accepted or dt underflows. dt_used reports the accepted
// size so callers can adapt.
inline Field step(const Field& f, const LinearOperator& op, const ModelParams& p,
                  double dt, const EvolveConfig& c, double& dt_used,
                  double* energy_increment = nullptr) {
    const double E0 = energy(f, op, p);
    const double gate = c.energy_tol_rel * std::abs(E0);
    const double dt_floor = c.dt0 * 1e-12;
    while (true) {
        bool ok = true;
        Field out;
        try {
            out = detail::step_raw(f, op, p, dt);
        } catch (const std::exception&) {
            ok = false;
        }
        if (ok) {
            for (double v : out.values)
                if (!(v > -1.0)) { ok = false; break; }
        }
        if (ok) {
            double E1;
            try {
                E1 = energy(out, op, p);
            } catch (const std::exception&) {
                E1 = E0 + 2.0 * gate;
            }
            if (E1 - E0 <= gate) {
                dt_used = dt;
                if (energy_increment) *energy_increment = E1 - E0;
                return out;
            }
        }
        dt *= 0.5;
        if (dt < dt_floor)
            throw StepFailure("step: dt underflow, unresolved stiffness");
    }
}

inline Field step(const Field& f, const LinearOperator& op, const ModelParams& p,
                  double dt) {
    EvolveConfig c;
    c.dt0 = dt;
    double used;
    return step(f, op, p, dt, c, used);
}

inline Trajectory evolve(const Field& u0, const ModelParams& p, const EvolveConfig& c) {
    p.validate();
    for (double v : u0.values)
        if (!(v > -1.0))
            throw std::domain_error("evolve: initial data touches the substrate");
    const LinearOperator op = build_elastic(p.order, u0.grid);
    const double td_level = -1.0 + 2.0 * p.eps;

    Trajectory tr;
    Field u = u0;
    double t = 0.0, dt = c.dt0, next_record = c.record_every;
    int accepted_in_a_row = 0;

    auto record = [&](double tt, const Field& ff) {
        tr.times.push_back(tt);
        tr.snapshots.push_back(ff);
        tr.energies.push_back(energy(ff, op, p));
        tr.fronts.push_back(detect_fronts(ff, p.eps));
    };
    record(0.0, u);

    while (t < c.t_end) {
        double used = dt, dE = 0.0;
        Field un = step(u, op, p, std::min(dt, c.t_end - t), c, used, &dE);
        tr.max_energy_increase = std::max(tr.max_energy_increase, dE);
        const double res = max_abs_diff(un, u) / used;
        t += used;
        u = std::move(un);
        ++tr.steps;
        if (used < dt) {
            dt = used;
            accepted_in_a_row = 0;
        } else if (++accepted_in_a_row >= 8) {
            dt = std::min(dt * 1.25, c.dt_max);
            accepted_in_a_row = 0;
        }
        if (!tr.touchdown_time && u.min() < td_level) {
            tr.touchdown_time = t;
            double xm, um;
            interior_min(u, xm, um);
            tr.touchdown_x = xm;
        }
        if (t >= next_record - 1e-12) {
            record(t, u);
            while (next_record <= t + 1e-12) next_record += c.record_every;
        }
        if (res < c.steady_tol) {
            tr.steady = true;
            break;
        }
    }
    if (tr.times.back() != t) record(t, u);
    return tr;
}

// Scalar comparison flow du/dt = -force(u), integrated by adaptive implicit
// trapezoid (the decay onto u = -1+eps is stiff). Values reported at the
// requested sorted times.
inline std::vector<double> scalar_flow(double u0, const ModelParams& p,
                                       const std::vector<double>& times) {
    auto g = [&](double u) { return -force(u, p); };
    auto dg = [&](double u) { return -dforce_du(u, p); };
    auto trap = [&](double u, double dt, bool& ok) {
        // solve z - u - dt/2 (g(u)+g(z)) = 0
        double z = u + dt * g(u);
        ok = true;
        if (z <= -1.0) { ok = false; return u; }
        for (int it = 0; it < 40; ++it) {
            const double F = z - u - 0.5 * dt * (g(u) + g(z));
            const double J = 1.0 - 0.5 * dt * dg(z);
            const double step = F / J;
            z -= step;
            if (z <= -1.0) { ok = false; return u; }
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) return z;
        }
        ok = false;
        return u;
    };
    std::vector<double> out;
    double u = u0, t = 0.0, dt = 1e-4;
    for (double target : times) {
        while (t < target) {
            const double hstep = std::min(dt, target - t);
            bool ok1, ok2, ok3;
            const double a = trap(u, hstep, ok1);
            const double m = trap(u, 0.5 * hstep, ok2);
            const double b = ok2 ? trap(m, 0.5 * hstep, ok3) : u;
            if (!ok1 || !ok2 || !ok3) { dt = 0.5 * hstep; continue; }
            const double err = std::abs(a - b) / 3.0;
            const double tol = 1e-11 * (1.0 + std::abs(b));
            if (err <= tol) {
                u = b;
                t += hstep;
                dt = hstep * std::min(2.0, 0.9 * std::sqrt(tol / std::max(err, 1e-300)));
            } else {
                dt = 0.5 * hstep;
            }
            if (dt < 1e-16)
                throw StepFailure("scalar_flow: dt underflow");
        }
        out.push_back(u);
    }
    return out;
}

// Comparison bounds of Theorem 1: scalar flows started from inf/sup of u0.
inline std::pair<double, double> comparison_bounds(const Field& u0,
                                                   const ModelParams& p, double t) {
    if (p.order != Order::second)
        throw std::invalid_argument("comparison_bounds: Laplacian flow only");
    if (u0.min() <= -1.0)
        throw std::domain_error("comparison_bounds: inf u0 <= -1");
    const double lo = scalar_flow(u0.min(), p, {t})[0];
    const double hi = scalar_flow(u0.max(), p, {t})[0];
    return {lo, hi};
}

} // namespace mems
