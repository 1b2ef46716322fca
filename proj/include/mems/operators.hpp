#pragma once

#include "banded.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace mems {

// Finite-difference elastic operator on interior unknowns. apply() realizes
// Delta_h (order=second, Dirichlet) or Delta_h^2 (order=fourth, clamped via
// ghost reflection u_{-1} = u_1). The stiffness form -Delta_h resp. Delta_h^2
// is positive definite.
struct LinearOperator {
    Order order = Order::second;
    Grid grid;
    Banded band; // matrix realized by apply()

    std::vector<double> apply(const std::vector<double>& u) const { return band.apply(u); }

    // Sign s such that the gradient-flow elastic term is s * apply(u):
    // u_t = Delta u ... (+1) or u_t = -Delta^2 u ... (-1).
    double elastic_sign() const { return order == Order::second ? 1.0 : -1.0; }

    // Positive-definite stiffness A = -elastic, as a fresh banded matrix.
    Banded stiffness() const {
        Banded s = band;
        if (order == Order::second)
            for (double& v : s.a) v = -v;
        return s;
    }
};

inline LinearOperator build_laplacian(const Grid& g) {
    if (g.n < 3)
        throw std::invalid_argument("build_laplacian: need n >= 3");
    LinearOperator op;
    op.order = Order::second;
    op.grid = g;
    op.band = Banded(g.n, 1, 1);
    const double c = 1.0 / (g.h * g.h);
    for (int i = 0; i < g.n; ++i) {
        op.band.at(i, i) = -2.0 * c;
        if (i > 0) op.band.at(i, i - 1) = c;
        if (i < g.n - 1) op.band.at(i, i + 1) = c;
    }
    return op;
}

inline LinearOperator build_biharmonic(const Grid& g) {
    if (g.n < 5)
        throw std::invalid_argument("build_biharmonic: need n >= 5");
    LinearOperator op;
    op.order = Order::fourth;
    op.grid = g;
    op.band = Banded(g.n, 2, 2);
    const double c = 1.0 / (g.h * g.h * g.h * g.h);
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
        double diag = 6.0;
        // clamped closure: ghost u_{-1} = u_1 folds into the first interior row
        if (i == 0 || i == n - 1) diag = 7.0;
        op.band.at(i, i) = diag * c;
        if (i > 0) op.band.at(i, i - 1) = -4.0 * c;
        if (i < n - 1) op.band.at(i, i + 1) = -4.0 * c;
        if (i > 1) op.band.at(i, i - 2) = c;
        if (i < n - 2) op.band.at(i, i + 2) = c;
    }
    return op;
}

inline LinearOperator build_elastic(Order order, const Grid& g) {
    return order == Order::second ? build_laplacian(g) : build_biharmonic(g);
}

// Gradient-flow energy: integral of (1/2)|u'|^2 (order=second) or
// (1/2)|u''|^2 (order=fourth) plus the potential, so that the evolution is
// exactly u_t = -grad E and dE/dt = -||u_t||^2 <= 0. The quadratic part is
// evaluated as -(h/2) u^T (elastic u), the discrete counterpart of
// integrating by parts with the operator's own boundary closure; the
// potential part is a trapezoid including the phi(0) boundary contribution.
inline double energy(const Field& f, const LinearOperator& op, const ModelParams& p) {
    const auto Lu = op.apply(f.values);
    const double s = op.elastic_sign();
    double quad = 0.0;
    for (int i = 0; i < f.n(); ++i) quad -= 0.5 * s * f.values[i] * Lu[i];
    double pot = potential_phi(0.0, p); // two boundary half-weights
    for (double v : f.values) {
        if (v <= -1.0)
            throw std::domain_error("energy: nodal value at or below -1");
        pot += potential_phi(v, p);
    }
    return f.grid.h * (quad + pot);
}

} // namespace mems
