#pragma once

#include "sqlab/funcspace.hpp"
#include "sqlab/plane.hpp"

namespace sqlab {

/// (f(x+t) - f(x-t)) / (2|t|)
double delta(const FunctionSource& f, double x, double t);

/// (f(x+t) + f(x-t) - 2 f(x)) / (2|t|)
double delta2(const FunctionSource& f, double x, double t);

/// First and second differences along the line p + R xi, d = 2 only.
double delta_xi(const Function2D& f, Vec2 p, double t, Vec2 xi);
double delta2_xi(const Function2D& f, Vec2 p, double t, Vec2 xi);

/// Validates a symmetric stencil {x - t, x, x + t} and the grid scale rule.
void check_stencil(const FunctionSource& f, double x, double t);

namespace detail {

// Stencil already validated by the caller.
inline double delta_raw(const FunctionSource& f, double x, double t) {
    return (f.raw(x + t) - f.raw(x - t)) / (2.0 * (t < 0 ? -t : t));
}

inline double delta2_raw(const FunctionSource& f, double x, double t) {
    return (f.raw(x + t) + f.raw(x - t) - 2.0 * f.raw(x)) / (2.0 * (t < 0 ? -t : t));
}

}  // namespace detail

}  // namespace sqlab
