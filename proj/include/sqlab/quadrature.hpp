#pragma once

#include <cmath>
#include <vector>

namespace sqlab {

/// Controls the tensor midpoint / Richardson quadrature used inside every
/// dyadic band.
struct QuadratureSpec {
    /// Midpoint nodes per axis on the first pass (>= 2).
    int nodes = 8;
    /// Relative change between successive extrapolated estimates that
    /// counts as converged; must lie in (0, 1e-2].
    double tolerance = 1e-6;
    /// Number of node doublings after the first pass.
    int max_levels = 7;
    /// Absolute slack added to the convergence test, so that integrands
    /// that vanish up to rounding converge.
    double absolute_floor = 1e-15;
    /// Bound on the number of dyadic bands walked when integrating down to
    /// height zero.
    int max_bands = 48;

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    bool converged = false;
    /// Nodes per axis used by the accepted estimate.
    int nodes = 0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

namespace detail {

inline double richardson(double coarse, double fine) { return fine + (fine - coarse) / 3.0; }

inline bool close_enough(double a, double b, double tol, double floor) {
    return std::abs(a - b) <= tol * std::abs(b) + floor;
}

}  // namespace detail

/// Midpoint rule on [a, b] with n nodes, doubled until the Richardson
/// extrapolant settles.
template <class G>
Estimate integrate_1d(G&& g, double a, double b, const QuadratureSpec& q, double floor) {
    auto midpoint = [&](int n) {
        const double w = (b - a) / n;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += g(a + (i + 0.5) * w);
        return sum * w;
    };
    int n = q.nodes;
    double coarse = midpoint(n);
    n *= 2;
    double fine = midpoint(n);
    if (detail::close_enough(coarse, fine, q.tolerance, floor)) return {fine, true, n};
    double extrap = detail::richardson(coarse, fine);
    for (int level = 2; level <= q.max_levels; ++level) {
        n *= 2;
        coarse = fine;
        fine = midpoint(n);
        const double next = detail::richardson(coarse, fine);
        if (detail::close_enough(extrap, next, q.tolerance, floor)) return {next, true, n};
        extrap = next;
    }
    return {extrap, false, n};
}

/// Tensor midpoint rule on [t0, t1] x [u0, u1], same refinement policy.
template <class G>
Estimate integrate_2d(G&& g, double t0, double t1, double u0, double u1, const QuadratureSpec& q,
                      double floor) {
    auto midpoint = [&](int n) {
        const double wt = (t1 - t0) / n;
        const double wu = (u1 - u0) / n;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = t0 + (i + 0.5) * wt;
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += g(t, u0 + (j + 0.5) * wu);
            sum += row;
        }
        return sum * wt * wu;
    };
    int n = q.nodes;
    double coarse = midpoint(n);
    n *= 2;
    double fine = midpoint(n);
    if (detail::close_enough(coarse, fine, q.tolerance, floor)) return {fine, true, n};
    double extrap = detail::richardson(coarse, fine);
    for (int level = 2; level <= q.max_levels; ++level) {
        n *= 2;
        coarse = fine;
        fine = midpoint(n);
        const double next = detail::richardson(coarse, fine);
        if (detail::close_enough(extrap, next, q.tolerance, floor)) return {next, true, n};
        extrap = next;
    }
    return {extrap, false, n};
}

}  // namespace sqlab
