#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace mems {

// Uniform grid of n interior nodes on [-1,1]; boundary nodes carry u = 0
// implicitly (Dirichlet / clamped closures live in the operators).
struct Grid {
    int n = 0;
    double h = 0.0;

    Grid() = default;
    explicit Grid(int n_) : n(n_), h(2.0 / (n_ + 1)) {
        if (n_ < 16)
            throw std::invalid_argument("Grid: need at least 16 interior nodes");
    }

    double x(int i) const { return -1.0 + (i + 1) * h; }
};

struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.n, 0.0) {}
    Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if ((int)values.size() != g.n)
            throw std::invalid_argument("Field: size mismatch");
    }

    int n() const { return grid.n; }
    double min() const {
        double r = 0.0; // boundary value participates
        for (double v : values) r = std::min(r, v);
        return r;
    }
    double max() const {
        double r = 0.0;
        for (double v : values) r = std::max(r, v);
        return r;
    }
};

// Trapezoid approximation of the integral of u^2 over [-1,1]; boundary
// endpoints contribute zero, so this is just h*sum(u_i^2).
inline double norm_sq(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return f.grid.h * s;
}

inline double max_abs_diff(const Field& a, const Field& b) {
    double r = 0.0;
    for (int i = 0; i < a.n(); ++i)
        r = std::max(r, std::abs(a.values[i] - b.values[i]));
    return r;
}

// Interior minimum of u plus its parabolic-refined location.
inline void interior_min(const Field& f, double& xmin, double& umin) {
    int k = 0;
    for (int i = 1; i < f.n(); ++i)
        if (f.values[i] < f.values[k]) k = i;
    xmin = f.grid.x(k);
    umin = f.values[k];
    if (k > 0 && k < f.n() - 1) {
        const double ym = f.values[k - 1], y0 = f.values[k], yp = f.values[k + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom > 0.0) {
            const double d = 0.5 * (ym - yp) / denom;
            xmin += d * f.grid.h;
            umin = y0 - 0.25 * (ym - yp) * d;
        }
    }
}

// Default resolution guidance: at least 8 nodes per boundary layer
// (width eps^{1/2} for order=second, eps^{3/4} inner width for order=fourth).
inline int default_grid_n(Order order, double eps) {
    double req = 512.0;
    if (eps > 0.0) {
        const double w = (order == Order::second) ? eps : std::pow(eps, 0.75);
        req = std::max(req, std::ceil(8.0 / w));
    }
    return (int)req;
}

} // namespace mems
