#include "sqlab/differences.hpp"

#include <cmath>

#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"

namespace sqlab {

void check_stencil(const FunctionSource& f, double x, double t) {
    if (t == 0.0 || !std::isfinite(t)) throw BadParameter("difference step t must be finite and nonzero");
    const double a = std::abs(t);
    const auto& dom = f.domain();
    if (!dom.contains(x - a) || !dom.contains(x) || !dom.contains(x + a))
        throw OutOfDomain("stencil x=" + fmt_num(x) + ", t=" + fmt_num(t) + " leaves domain " + dom.describe());
    if (f.is_grid() && a < 2.0 * f.spacing())
        throw ScaleTooFine("|t| = " + fmt_num(a) + " below twice the grid spacing " + fmt_num(f.spacing()));
}

double delta(const FunctionSource& f, double x, double t) {
    check_stencil(f, x, t);
    return detail::delta_raw(f, x, t);
}

double delta2(const FunctionSource& f, double x, double t) {
    check_stencil(f, x, t);
    return detail::delta2_raw(f, x, t);
}

namespace {

void check_segment(const Function2D& f, Vec2 p, double t, Vec2 xi) {
    if (t == 0.0 || !std::isfinite(t)) throw BadParameter("difference step t must be finite and nonzero");
    if (std::abs(std::hypot(xi.x, xi.y) - 1.0) > 1e-12) throw BadParameter("direction must be a unit vector");
    // Rectangles are convex: the two ends and the centre cover the segment.
    if (!f.domain().contains(p) || !f.domain().contains(p + t * xi) || !f.domain().contains(p + (-t) * xi))
        throw OutOfDomain("segment leaves the domain of " + f.label());
}

}  // namespace

double delta_xi(const Function2D& f, Vec2 p, double t, Vec2 xi) {
    check_segment(f, p, t, xi);
    return (f.raw(p + t * xi) - f.raw(p + (-t) * xi)) / (2.0 * std::abs(t));
}

double delta2_xi(const Function2D& f, Vec2 p, double t, Vec2 xi) {
    check_segment(f, p, t, xi);
    return (f.raw(p + t * xi) + f.raw(p + (-t) * xi) - 2.0 * f.raw(p)) / (2.0 * std::abs(t));
}

}  // namespace sqlab
