#pragma once

#include <cmath>
#include <stdexcept>

namespace mems {

enum class Order { second, fourth };

struct ModelParams {
    double lambda = 1.0;  // dimensionless voltage
    double eps = 0.0;     // regularization parameter, in [0,1)
    int m = 4;            // regularization exponent, >= 3
    Order order = Order::second;

    void validate() const {
        if (lambda < 0.0)
            throw std::invalid_argument("ModelParams: lambda must be >= 0");
        if (eps < 0.0 || eps >= 1.0)
            throw std::invalid_argument("ModelParams: eps must lie in [0,1)");
        if (m < 3)
            throw std::invalid_argument("ModelParams: m must be >= 3");
    }
};

namespace detail {
// Integer power by squaring; exponents here are small (m-2, m-1, m, m+1).
inline double ipow(double x, int k) {
    double r = 1.0, b = x;
    for (; k > 0; k >>= 1) {
        if (k & 1) r *= b;
        b *= b;
    }
    return r;
}
} // namespace detail

// Electrostatic force density lambda/(1+u)^2 - lambda eps^{m-2}/(1+u)^m.
// Evaluated in the gap variable g = 1+u; the repulsive term is written as
// (eps/g)^{m-2}/g^2 so that force(-1+eps) vanishes without cancellation.
inline double force(double u, const ModelParams& p) {
    const double g = 1.0 + u;
    if (g <= 0.0)
        throw std::domain_error("force: gap closed (u <= -1)");
    const double r = detail::ipow(p.eps / g, p.m - 2);
    return p.lambda / (g * g) * (1.0 - r);
}

// d force / du, needed by Newton solvers and the implicit time stepper.
inline double dforce_du(double u, const ModelParams& p) {
    const double g = 1.0 + u;
    if (g <= 0.0)
        throw std::domain_error("dforce_du: gap closed (u <= -1)");
    const double r = detail::ipow(p.eps / g, p.m - 2);
    return p.lambda / (g * g * g) * (p.m * r - 2.0);
}

// force with lambda factored out; the continuation solver needs d force/d lambda.
inline double force_unit(double u, const ModelParams& p) {
    const double g = 1.0 + u;
    if (g <= 0.0)
        throw std::domain_error("force_unit: gap closed (u <= -1)");
    const double r = detail::ipow(p.eps / g, p.m - 2);
    return (1.0 - r) / (g * g);
}

// Potential phi_eps(u) = -lambda/(1+u) + lambda eps^{m-2}/((m-1)(1+u)^{m-1}),
// the exact antiderivative of force.
inline double potential_phi(double u, const ModelParams& p) {
    const double g = 1.0 + u;
    if (g <= 0.0)
        throw std::domain_error("potential_phi: gap closed (u <= -1)");
    const double r = detail::ipow(p.eps / g, p.m - 2);
    return p.lambda / g * (r / (p.m - 1) - 1.0);
}

} // namespace mems
