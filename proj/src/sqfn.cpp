#include "sqlab/sqfn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "sqlab/differences.hpp"
#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"

namespace sqlab {

namespace {

// Bands in a row whose contribution is negligible before a walk to height
// zero stops.
constexpr int kQuietBands = 3;

struct BandWalk {
    double total = 0.0;
    bool terminated = true;
    bool quadrature_ok = true;
    std::vector<double> bands;  // band k covers [top 2^{-k-1}, top 2^{-k}]
};

// Walks dyadic bands downward from `top`. With lower > 0 the last band is
// cut at `lower`; with lower == 0 the walk stops once kQuietBands bands in
// a row are negligible, or reports terminated = false at max_bands.
template <class Band>
BandWalk walk_bands(Band&& band, double top, double lower, const QuadratureSpec& q) {
    BandWalk walk;
    int quiet = 0;
    double hi = top;
    for (int k = 0;; ++k) {
        if (lower > 0.0 && hi <= lower) break;
        if (lower == 0.0 && k >= q.max_bands) {
            walk.terminated = false;
            break;
        }
        const double lo = std::max(hi / 2.0, lower);
        const double floor = std::max(q.absolute_floor, 0.1 * q.tolerance * std::abs(walk.total));
        const Estimate e = band(lo, hi, floor);
        walk.quadrature_ok = walk.quadrature_ok && e.converged;
        walk.bands.push_back(e.value);
        walk.total += e.value;
        if (lower == 0.0) {
            quiet = (std::abs(e.value) <= q.tolerance * std::abs(walk.total) + q.absolute_floor) ? quiet + 1 : 0;
            if (quiet >= kQuietBands) break;
        }
        hi = lo;
    }
    return walk;
}

Estimate cone_band_estimate(const FunctionSource& f, double x, double lo, double hi, const QuadratureSpec& q,
                            double floor) {
    auto g = [&f, x](double t, double u) {
        const double d = detail::delta2_raw(f, x + t * u, t);
        return d * d / t;
    };
    return integrate_2d(g, lo, hi, -1.0, 1.0, q, floor);
}

void require_interior(const FunctionSource& f, double x) {
    if (!f.domain().contains(x))
        throw OutOfDomain("x = " + fmt_num(x) + " outside domain " + f.domain().describe());
}

void require_range(const FunctionSource& f, double a, double b, const char* what) {
    if (!f.domain().contains_open(a, b))
        throw OutOfDomain(std::string(what) + ": (" + fmt_num(a) + "," + fmt_num(b) + ") not inside domain " +
                          f.domain().describe());
}

void require_scale(const FunctionSource& f, double scale) {
    if (f.is_grid() && scale < 2.0 * f.spacing())
        throw ScaleTooFine("scale " + fmt_num(scale) + " below twice the grid spacing " + fmt_num(f.spacing()));
}

double grid_floor(const FunctionSource& f) { return f.is_grid() ? 2.0 * f.spacing() : 0.0; }

double conical_impl(const FunctionSource& f, double x, double h, double h0, const QuadratureSpec& q) {
    q.validate();
    if (!(h >= 0.0)) throw BadParameter("truncation height h must be >= 0");
    if (!(h < h0)) throw BadParameter("truncation height " + fmt_num(h) + " must be below h0 = " + fmt_num(h0));
    const double lower = std::max(h, grid_floor(f));
    if (lower >= h0) return 0.0;
    auto band = [&](double lo, double hi, double floor) { return cone_band_estimate(f, x, lo, hi, q, floor); };
    const BandWalk walk = walk_bands(band, h0, lower, q);
    if (!walk.terminated) throw NoConvergence("conical square function still growing at height " +
                                                  fmt_num(h0 * std::ldexp(1.0, -q.max_bands)),
                                              walk.total);
    if (!walk.quadrature_ok) throw NoConvergence("band quadrature did not reach tolerance", walk.total);
    return walk.total;
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

NormalizedHeight normalizer_H(double y) {
    if (!(y > 0.0 && y < 2.0)) throw BadParameter("normalizer needs 0 < y < 2, got " + fmt_num(y));
    int e = 0;
    const double m = std::frexp(y, &e);  // y = m 2^e, m in [0.5, 1)
    return {1 - e, 2.0 * m};
}

double conical_A2(const FunctionSource& f, double x, double h, const QuadratureSpec& q) {
    const ConeHeight c = cone_height(f, x);
    return conical_impl(f, x, h, c.h0, q);
}

double cone_band(const FunctionSource& f, double x, double t_lo, double t_hi, const QuadratureSpec& q) {
    q.validate();
    const ConeHeight c = cone_height(f, x);
    if (!(0.0 < t_lo && t_lo < t_hi && t_hi <= c.h0)) throw BadParameter("band must satisfy 0 < t_lo < t_hi <= h0");
    require_scale(f, t_lo);
    const Estimate e = cone_band_estimate(f, x, t_lo, t_hi, q, q.absolute_floor);
    if (!e.converged) throw NoConvergence("band quadrature did not reach tolerance", e.value);
    return e.value;
}

bool divergence_flag(std::span<const double> heights, std::span<const double> values, double* slope_out) {
    if (heights.size() != values.size()) throw BadParameter("profile heights and values differ in length");
    double slope = 0.0;
    if (heights.size() >= 2) {
        std::vector<double> logs(heights.size());
        for (std::size_t i = 0; i < heights.size(); ++i) logs[i] = std::log(1.0 / heights[i]);
        slope = least_squares_slope(logs, values);
    }
    if (slope_out) *slope_out = slope;
    if (heights.size() < 4 || !(slope > 1e-10)) return false;
    const std::size_t n = heights.size();
    for (std::size_t i = n - 3; i < n; ++i) {
        const double expected = slope * std::log(heights[i - 1] / heights[i]);
        if (values[i] - values[i - 1] < 0.5 * expected) return false;
    }
    return true;
}

SquareProfile square_profile(const FunctionSource& f, double x, int j_min, int j_max, const QuadratureSpec& q) {
    q.validate();
    if (j_min < 0 || j_max < j_min || j_max > 60) throw BadParameter("profile levels must satisfy 0 <= j_min <= j_max <= 60");
    const ConeHeight c = cone_height(f, x);
    const double finest = std::ldexp(c.h0, -j_max);
    require_scale(f, finest);

    auto band = [&](double lo, double hi, double floor) { return cone_band_estimate(f, x, lo, hi, q, floor); };
    const BandWalk walk = walk_bands(band, c.h0, finest, q);

    SquareProfile p;
    p.x = x;
    p.h0 = c.h0;
    p.quadrature_warning = !walk.quadrature_ok;
    double running = 0.0;
    for (int j = 0; j <= j_max; ++j) {
        if (j > 0) running += walk.bands[static_cast<std::size_t>(j - 1)];
        if (j < j_min) continue;
        p.levels.push_back(j);
        p.heights.push_back(std::ldexp(c.h0, -j));
        p.values.push_back(running);
    }
    p.diverging = divergence_flag(p.heights, p.values, &p.slope);
    return p;
}

double vertical_g2(const FunctionSource& f, double x, double delta_, const QuadratureSpec& q) {
    q.validate();
    if (!(delta_ > 0.0)) throw BadParameter("vertical square function needs delta > 0");
    require_interior(f, x);
    require_range(f, x - delta_, x + delta_, "vertical square function");
    auto band = [&](double lo, double hi, double floor) {
        auto g = [&f, x](double t) {
            const double d = detail::delta2_raw(f, x, t);
            return 2.0 * d * d / t;  // both signs of t
        };
        return integrate_1d(g, lo, hi, q, floor);
    };
    const BandWalk walk = walk_bands(band, delta_, grid_floor(f), q);
    if (!walk.terminated) throw NoConvergence("vertical square function still growing", walk.total);
    if (!walk.quadrature_ok) throw NoConvergence("band quadrature did not reach tolerance", walk.total);
    return walk.total;
}

double averaged_difference(const FunctionSource& f, double x, double y, const QuadratureSpec& q) {
    q.validate();
    if (!(y > 0.0)) throw BadParameter("averaged difference needs y > 0");
    require_interior(f, x);
    require_range(f, x - 2.0 * y, x + 2.0 * y, "averaged difference");
    require_scale(f, y / 2.0);
    auto g = [&f, x](double t, double u) { return detail::delta_raw(f, x + t * u, t) / (2.0 * t); };
    const Estimate e = integrate_2d(g, y / 2.0, y, -1.0, 1.0, q, q.absolute_floor);
    if (!e.converged) throw NoConvergence("mean divided difference quadrature did not reach tolerance", e.value);
    return e.value;
}

double mean_divided_diff(const FunctionSource& f, double x, double h, const QuadratureSpec& q) {
    const ConeHeight c = cone_height(f, x);
    if (!(h > 0.0 && h < 1.0)) throw BadParameter("mean divided difference needs 0 < h < 1");
    if (!(h < c.h0)) throw BadParameter("mean divided difference needs h < h0 = " + fmt_num(c.h0));
    return averaged_difference(f, x, h, q);
}

double tilde_A2(const FunctionSource& f, double x, double y, const QuadratureSpec& q) {
    q.validate();
    if (!(y > 0.0 && y < 1.0)) throw BadParameter("tilde A2 needs 0 < y < 1");
    const NormalizedHeight nh = normalizer_H(y);
    require_interior(f, x);
    require_range(f, x - 2.0 * nh.H, x + 2.0 * nh.H, "tilde A2");
    require_scale(f, y);
    auto band = [&](double lo, double hi, double floor) {
        auto g = [&f, x](double h, double u) {
            const double d = detail::delta2_raw(f, x + h * u, h);
            return 0.5 * d * d / h;
        };
        return integrate_2d(g, lo, hi, -1.0, 1.0, q, floor);
    };
    const BandWalk walk = walk_bands(band, nh.H, y, q);
    if (!walk.quadrature_ok) throw NoConvergence("band quadrature did not reach tolerance", walk.total);
    return walk.total;
}

TildeDecomposition tilde_A2_decomposition(const FunctionSource& f, double x, double y, const QuadratureSpec& q) {
    const NormalizedHeight nh = normalizer_H(y);
    TildeDecomposition out{};
    out.tilde = tilde_A2(f, x, y, q);
    if (cone_height(f, x).h0 < 1.0) throw BadParameter("decomposition assumes h0(x) = 1");
    out.half_A2 = 0.5 * conical_A2(f, x, y, q);
    out.tail = 0.0;
    if (nh.H > 1.0) {
        auto g = [&f, x](double h, double u) {
            const double d = detail::delta2_raw(f, x + h * u, h);
            return 0.5 * d * d / h;
        };
        const Estimate e = integrate_2d(g, 1.0, nh.H, -1.0, 1.0, q, q.absolute_floor);
        if (!e.converged) throw NoConvergence("tail quadrature did not reach tolerance", e.value);
        out.tail = e.value;
    }
    return out;
}

double mean_dd_star(const FunctionSource& f, double x, double h, const QuadratureSpec& q) {
    q.validate();
    if (!(h > 0.0)) throw BadParameter("mean_dd_star needs h > 0");
    require_interior(f, x);
    require_range(f, x - 2.0 * h, x + 2.0 * h, "mean_dd_star");
    require_scale(f, h);
    auto g = [&f, x, h](double u) { return 0.5 * detail::delta_raw(f, x + h * u, h); };
    const Estimate e = integrate_1d(g, -1.0, 1.0, q, q.absolute_floor);
    if (!e.converged) throw NoConvergence("mean_dd_star quadrature did not reach tolerance", e.value);
    return e.value;
}

double discrete_A2(const FunctionSource& f, double x, int N, const QuadratureSpec& q) {
    q.validate();
    if (N < 1) throw BadParameter("discrete A2 needs N >= 1");
    require_interior(f, x);
    require_range(f, x - 2.0, x + 2.0, "discrete A2");
    require_scale(f, std::ldexp(1.0, -N));
    double sum = 0.0;
    for (int k = 1; k <= N; ++k) {
        const double t = std::ldexp(1.0, -k);
        auto g = [&f, x, t](double u) {
            const double d = detail::delta2_raw(f, x + t * u, t);
            return t * d * d;
        };
        const Estimate e = integrate_1d(g, -1.0, 1.0, q, q.absolute_floor);
        if (!e.converged) throw NoConvergence("discrete A2 quadrature did not reach tolerance", sum + e.value);
        sum += e.value;
    }
    return sum;
}

// ------------------------------------------------------------------ d = 2

double directional_A2(const Function2D& f, Vec2 p, Vec2 xi, double h, const QuadratureSpec& q) {
    const double h0 = f.cone_height(p);
    const FunctionSource line = f.restrict_to_line(p, xi);
    return conical_impl(line, 0.0, h, h0, q);
}

double directional_mean_dd(const Function2D& f, Vec2 p, Vec2 xi, double h, const QuadratureSpec& q) {
    const double h0 = f.cone_height(p);
    if (!(h > 0.0 && h < 1.0)) throw BadParameter("directional mean divided difference needs 0 < h < 1");
    if (!(h < h0)) throw BadParameter("directional mean divided difference needs h < h0 = " + fmt_num(h0));
    return averaged_difference(f.restrict_to_line(p, xi), 0.0, h, q);
}

double sphere_A2(const Function2D& f, Vec2 p, double h, int M, const QuadratureSpec& q) {
    if (M < 4) throw BadParameter("sphere average needs M >= 4 directions");
    double sum = 0.0;
    for (int m = 0; m < M; ++m) {
        const double theta = 2.0 * std::numbers::pi * m / M;
        sum += directional_A2(f, p, direction(theta), h, q);
    }
    return sum / M;
}

double sector_measure(std::span<const AngleInterval> arcs) {
    double total = 0.0;
    for (const auto& a : arcs) {
        if (!(a.lo < a.hi) || a.hi - a.lo > 2.0 * std::numbers::pi + 1e-12)
            throw BadParameter("angle interval must satisfy lo < hi and length <= 2 pi");
        total += (a.hi - a.lo) / (2.0 * std::numbers::pi);
    }
    if (total > 1.0 + 1e-12) throw BadParameter("angle intervals overlap: total measure exceeds the circle");
    return total;
}

double mean_dd_sector(const Function2D& f, Vec2 p, double h, std::span<const AngleInterval> arcs,
                      const QuadratureSpec& q) {
    q.validate();
    sector_measure(arcs);
    double total = 0.0;
    for (const auto& a : arcs) {
        auto g = [&](double theta) { return directional_mean_dd(f, p, direction(theta), h, q); };
        // Inner values carry their own quadrature error; the outer rule
        // accepts changes at that level.
        const Estimate e = integrate_1d(g, a.lo, a.hi, q, q.absolute_floor + 10.0 * q.tolerance);
        total += e.value / (2.0 * std::numbers::pi);
    }
    return total;
}

void write_profiles_csv(std::ostream& out, std::span<const SquareProfile> profiles) {
    out << "# schema_version: 1\n";
    out << "x,h,value,flag\n";
    for (const auto& p : profiles) {
        for (std::size_t i = 0; i < p.heights.size(); ++i) {
            out << fmt_num(p.x) << ',' << fmt_num(p.heights[i]) << ',' << fmt_num(p.values[i]) << ','
                << (p.diverging ? 1 : 0) << '\n';
        }
    }
}

}  // namespace sqlab
