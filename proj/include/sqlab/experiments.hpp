#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sqlab/funcspace.hpp"
#include "sqlab/quadrature.hpp"
#include "sqlab/report.hpp"

namespace sqlab {

// --------------------------------------------------- martingale averages

/// Controls the (rho, s) tensor Gauss-Legendre rule for the martingale side
/// of the averaging identities. The s-integral is split at the breakpoints
/// of the generation-N grid; s_nodes counts nodes per piece.
struct IdentitySpec {
    /// Quadrature for the square-function side.
    QuadratureSpec lhs{8, 1e-9, 8, 1e-15, 48};
    int rho_nodes = 16;
    int s_nodes = 16;
    /// Relative change between successive node doublings that counts as
    /// converged.
    double tolerance = 1e-8;
    /// Absolute slack in the convergence test; also the smallest scale
    /// used to form the relative error.
    double absolute_floor = 1e-14;
    /// Node doublings after the first pass.
    int max_refinements = 4;

    void validate() const;
};

struct IdentityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    /// |lhs - rhs| / max(|lhs|, |rhs|, absolute_floor)
    double rel_error = 0.0;
    /// rhs estimate before the last doubling
    double rhs_previous = 0.0;
    int rho_nodes = 0;
    int s_nodes = 0;
    bool rhs_converged = false;
};

/// mean divided difference at (x, y) against the (rho, s) average of S_N.
IdentityResult check_identity_a(const FunctionSource& f, double x, double y, const IdentitySpec& spec = {});
/// tilde A^2 at (x, y) against the (rho, s) average of <S>_N^2.
IdentityResult check_identity_b(const FunctionSource& f, double x, double y, const IdentitySpec& spec = {});

// -------------------------------------------------------------- good lambda

struct GoodLambdaSpec {
    QuadratureSpec quad{};
    /// Sample points: cell midpoints of a uniform partition of I.
    int samples = 64;
    /// Geometric y-grid density on [h, 1] for the sup over y.
    int y_per_octave = 4;
    int threads = 0;
};

/// Per-point quantities, computed once and thresholded for every (M, N).
struct GoodLambdaPoint {
    double x = 0.0;
    /// sup_{1 >= y >= h} (mean_dd(x, y) - mean_dd(x, H(y))) over the y-grid
    double sup_gap = 0.0;
    double tilde_a2 = 0.0;
    /// Some quadrature stopped at its refinement limit; the best estimate
    /// is used.
    bool quadrature_warning = false;
};

std::vector<GoodLambdaPoint> good_lambda_points(const FunctionSource& f, Interval I, double h,
                                                const GoodLambdaSpec& spec = {});

struct GoodLambdaResult {
    double M = 0.0;
    double N = 0.0;
    /// fraction of sample points in E(M, N), times |I|
    double measure = 0.0;
    std::int64_t count = 0;
    /// (M^2 / 2N) exp(-M^2 / (2N ln 4)) |I|
    double bound_shape = 0.0;
    /// measure / bound_shape: the smallest constant consistent with this point.
    double fitted_C = 0.0;
};

/// Requires M^2 > 4N.
GoodLambdaResult good_lambda_measure(std::span<const GoodLambdaPoint> points, Interval I, double M, double N);
GoodLambdaResult good_lambda_measure(const FunctionSource& f, Interval I, double M, double N, double h,
                                     const GoodLambdaSpec& spec = {});

// ---------------------------------------------------------------------- LIL

/// sqrt(2 ln 2)
double lil_constant();

struct RatioStatistic {
    double x = 0.0;
    int j = 0;
    double h = 0.0;
    /// |mean_dd(x, h)|
    double numerator = 0.0;
    double a2 = 0.0;
    /// sqrt(A^2 ln ln A^2); zero when pre-asymptotic
    double denominator = 0.0;
    double ratio = 0.0;
    /// A^2 <= e, so ln ln A^2 is not positive; no ratio is formed.
    bool pre_asymptotic = true;
    /// Some quadrature stopped at its refinement limit; the best estimate
    /// is used.
    bool quadrature_warning = false;
};

struct LilPoint {
    double x = 0.0;
    /// Max ratio over the admissible records; NaN when there are none.
    double max_ratio = 0.0;
    int admissible = 0;
};

struct LilSpec {
    QuadratureSpec quad{};
    int j_min = 6;
    int j_max = 18;
    int threads = 0;
};

struct LilResult {
    /// Ordered by (x index, j).
    std::vector<RatioStatistic> records;
    std::vector<LilPoint> points;
};

LilResult lil_profile(const FunctionSource& f, std::span<const double> xs, const LilSpec& spec = {});

// ------------------------------------------------------------ Zygmund growth

struct GrowthFit {
    double x = 0.0;
    /// Least-squares slope of A^2(x, h0 2^-j) against j ln 2.
    double slope = 0.0;
    double intercept = 0.0;
    /// Coefficient of determination; 0 when the values are constant.
    double r2 = 0.0;
    bool diverging = false;
    std::vector<double> values;
};

struct GrowthSpec {
    QuadratureSpec quad{};
    int j_min = 4;
    int j_max = 18;
    int threads = 0;
};

std::vector<GrowthFit> zygmund_growth(const FunctionSource& f, std::span<const double> xs,
                                      const GrowthSpec& spec = {});

// ------------------------------------------------------------------ Sobolev

struct SobolevSpec {
    QuadratureSpec quad{8, 1e-4, 7, 1e-15, 48};
    /// Gauss-Legendre nodes per x-panel.
    int panel_nodes = 8;
    /// Largest x-panel width away from breakpoints.
    double panel_width = 0.25;
    /// Geometric panels toward each breakpoint of f.
    int grading_levels = 16;
    /// Also run at doubled resolution and report the ratio change.
    bool refine = true;
    int threads = 0;

    void validate() const;
};

struct SobolevRow {
    std::string function;
    double p = 0.0;
    double norm_A = 0.0;
    double norm_df = 0.0;
    /// norm_A / norm_df; NaN when both vanish
    double ratio = 0.0;
    double ratio_refined = 0.0;
    /// |ratio_refined - ratio| / |ratio|
    double refinement_change = 0.0;
};

struct SobolevResult {
    std::vector<SobolevRow> rows;
    /// For each p (same order as the input list), max ratio / min ratio.
    std::vector<double> spread;
};

/// ||A(f)||_p and ||f'||_p over the support of f widened by 2, for each f
/// in the family (compact support and known derivative required).
SobolevResult sobolev_compare(std::span<const FunctionSource> family, std::span<const double> ps,
                              const SobolevSpec& spec = {});

// ------------------------------------------------------------- classifier

struct ClassifySpec {
    QuadratureSpec quad{8, 1e-4, 5, 1e-15, 48};
    /// Delta(f)(x, 2^-j) and Delta_2(f)(x, 2^-j) are sampled at j = j_min..j_max.
    int j_min = 8;
    int j_max = 16;
    /// Oscillation bound for the divided differences (derivative exists).
    double derivative_tol = 1e-3;
    /// Bound on sup |Delta_2| (locally bounded).
    double delta2_bound = 1e3;
    /// Square-function profile levels for the divergence flag.
    int profile_j_min = 4;
    int profile_j_max = 16;
    int threads = 0;
};

struct PointLabel {
    double x = 0.0;
    double oscillation = 0.0;
    double delta2_sup = 0.0;
    bool diverging = false;
    bool a_label = false;
    bool b_label = false;
};

struct ClassifyResult {
    std::vector<PointLabel> labels;
    /// fraction of points where the labels coincide
    double agreement = 0.0;
    /// fraction of points where both labels are false
    double both_false = 0.0;
};

ClassifyResult classify_differentiability(const FunctionSource& f, std::span<const double> xs,
                                          const ClassifySpec& spec = {});

// ---------------------------------------------------------------- helpers

/// Cell midpoints of a uniform partition of [lo, hi] into n cells.
std::vector<double> uniform_samples(double lo, double hi, int n);
/// n independent uniform points in [lo, hi) from mt19937_64(seed), 53-bit
/// mantissas; identical on every platform.
std::vector<double> random_samples(double lo, double hi, int n, std::uint64_t seed);

/// Least-squares fit y = a + b x with R^2.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------- reports

ExperimentReport identity_report(const std::string& which, const FunctionSource& f,
                                 std::span<const double> xs, std::span<const double> ys,
                                 std::span<const IdentityResult> results, const IdentitySpec& spec);
ExperimentReport good_lambda_report(const FunctionSource& f, Interval I, double h,
                                    std::span<const GoodLambdaPoint> points,
                                    std::span<const GoodLambdaResult> curve, const GoodLambdaSpec& spec);
ExperimentReport lil_report(const FunctionSource& f, const LilResult& r, const LilSpec& spec, double epsilon);
ExperimentReport growth_report(const FunctionSource& f, std::span<const GrowthFit> fits, const GrowthSpec& spec,
                               double epsilon);
ExperimentReport sobolev_report(const SobolevResult& r, std::span<const double> ps, const SobolevSpec& spec);
ExperimentReport classify_report(const FunctionSource& f, const ClassifyResult& r, const ClassifySpec& spec);

}  // namespace sqlab
