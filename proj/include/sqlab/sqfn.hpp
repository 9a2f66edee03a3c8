#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

#include "sqlab/funcspace.hpp"
#include "sqlab/plane.hpp"
#include "sqlab/quadrature.hpp"

namespace sqlab {

/// {(s, t) : |s - x| < t, h < t < h0}
struct ConeRegion {
    double x;
    double h;
    double h0;

    bool contains(double s, double t) const { return std::abs(s - x) < t && h < t && t < h0; }
};

/// A^2(f)(x, h_j) at dyadic heights h_j = h0 2^{-j}, heights descending.
struct SquareProfile {
    double x = 0.0;
    double h0 = 1.0;
    std::vector<int> levels;
    std::vector<double> heights;
    std::vector<double> values;
    /// Least-squares slope of the values against ln(1/h).
    double slope = 0.0;
    /// Consistent linear growth in ln(1/h) at the fine end.
    bool diverging = false;
    /// Some band quadrature hit its refinement limit.
    bool quadrature_warning = false;
};

/// H = 2^N y with 1 <= H < 2, for 0 < y < 2.
struct NormalizedHeight {
    int N;
    double H;
};

NormalizedHeight normalizer_H(double y);

/// Truncated conical square function
///   A^2(f)(x, h) = int_{Gamma(x), t >= h} Delta_2^2(f)(s, t) ds dt / t^2.
/// With h = 0 the bands are walked until their contributions die out;
/// throws NoConvergence (carrying the partial sum) when they do not.
double conical_A2(const FunctionSource& f, double x, double h, const QuadratureSpec& q = {});

/// Same integral over one band t in [t_lo, t_hi] of the cone at x.
double cone_band(const FunctionSource& f, double x, double t_lo, double t_hi, const QuadratureSpec& q = {});

/// A^2(f)(x, h0 2^{-j}) for j = j_min..j_max (one quadrature pass).
SquareProfile square_profile(const FunctionSource& f, double x, int j_min, int j_max,
                             const QuadratureSpec& q = {});

/// Divergence rule on a profile: positive slope and each of the last three
/// increments at least half the increment the slope predicts.
bool divergence_flag(std::span<const double> heights, std::span<const double> values, double* slope = nullptr);

/// g_delta^2(f)(x) = int_{|t| < delta} Delta_2^2(f)(x, t) dt / |t|  (d = 1).
double vertical_g2(const FunctionSource& f, double x, double delta, const QuadratureSpec& q = {});

/// int_{y/2}^{y} avg_{|s-x|<h} Delta(f)(s, h) ds dh / h for any y > 0 whose
/// stencil fits the domain.
double averaged_difference(const FunctionSource& f, double x, double y, const QuadratureSpec& q = {});

/// Mean divided difference, 0 < h < min(1, h0(x)).
double mean_divided_diff(const FunctionSource& f, double x, double h, const QuadratureSpec& q = {});

/// int_y^{H(y)} avg_{|s-x|<h} Delta_2^2(f)(s, h) ds dh / h, 0 < y < 1.
double tilde_A2(const FunctionSource& f, double x, double y, const QuadratureSpec& q = {});

struct TildeDecomposition {
    double tilde;
    double half_A2;
    /// int_1^H avg Delta_2^2 ds dh / h
    double tail;
};

TildeDecomposition tilde_A2_decomposition(const FunctionSource& f, double x, double y,
                                          const QuadratureSpec& q = {});

/// avg_{|s-x|<h} Delta(f)(s, h) ds
double mean_dd_star(const FunctionSource& f, double x, double h, const QuadratureSpec& q = {});

/// sum_{k=1}^{N} int_{|s-x|<2^-k} Delta_2^2(f)(s, 2^-k) ds
double discrete_A2(const FunctionSource& f, double x, int N, const QuadratureSpec& q = {});

// ------------------------------------------------------------------ d = 2

double directional_A2(const Function2D& f, Vec2 p, Vec2 xi, double h, const QuadratureSpec& q = {});
double directional_mean_dd(const Function2D& f, Vec2 p, Vec2 xi, double h, const QuadratureSpec& q = {});

/// Trapezoidal average of directional_A2 over M equispaced directions.
double sphere_A2(const Function2D& f, Vec2 p, double h, int M, const QuadratureSpec& q = {});

/// Closed arc [lo, hi] of angles in radians.
struct AngleInterval {
    double lo;
    double hi;
};

/// Normalized arc length of a union of disjoint arcs.
double sector_measure(std::span<const AngleInterval> arcs);

/// int_E mean_dd_xi(f)(p, h) dsigma(xi) with sigma the normalized circle
/// measure.
double mean_dd_sector(const Function2D& f, Vec2 p, double h, std::span<const AngleInterval> arcs,
                      const QuadratureSpec& q = {});

/// CSV rows "x,h,value,flag" with a schema header.
void write_profiles_csv(std::ostream& out, std::span<const SquareProfile> profiles);

}  // namespace sqlab
