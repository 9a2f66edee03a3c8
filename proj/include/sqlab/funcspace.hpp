#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sqlab {

struct Interval {
    double lo;
    double hi;

    double length() const { return hi - lo; }
};

/// Finite union of disjoint open intervals. Endpoints may be infinite.
class OpenDomain {
public:
    OpenDomain() = default;
    explicit OpenDomain(std::vector<Interval> intervals);

    static OpenDomain real_line();
    static OpenDomain interval(double lo, double hi);

    bool contains(double x) const;
    /// True when the open interval (a, b) lies inside a single component.
    bool contains_open(double a, double b) const;
    /// True when the closed segment [a, b] lies inside a single component.
    bool contains_closed(double a, double b) const;
    /// dist(x, R \ U); zero when x is not in the domain.
    double distance_to_complement(double x) const;

    OpenDomain translated(double s) const;
    std::span<const Interval> intervals() const { return intervals_; }
    bool is_real_line() const;
    std::string describe() const;

private:
    std::vector<Interval> intervals_;
};

namespace detail {

class Kernel {
public:
    virtual ~Kernel() = default;
    virtual double value(double x) const = 0;
    virtual std::optional<double> derivative(double) const { return std::nullopt; }
};

}  // namespace detail

/// Descriptive data carried by a function source, in its own (unshifted)
/// coordinates.
struct SourceInfo {
    std::string id;
    std::vector<double> params;
    /// Uniform bound on |f - truncated f| for truncated series.
    std::optional<double> tail_bound;
    /// Points where f is not smooth.
    std::vector<double> breakpoints;
    /// Closed interval outside which f vanishes (numerically, for gauss-sine).
    std::optional<Interval> support;
};

/// An immutable real function of one variable on an open domain.
/// Copies share the underlying kernel; evaluation is thread-safe.
class FunctionSource {
public:
    FunctionSource(std::shared_ptr<const detail::Kernel> kernel, OpenDomain domain,
                   SourceInfo info, double spacing = 0.0);

    /// Checked evaluation; throws OutOfDomain.
    double evaluate(double x) const;
    double operator()(double x) const { return evaluate(x); }
    /// Unchecked evaluation for inner quadrature loops whose stencil has
    /// already been validated.
    double raw(double x) const { return kernel_->value(x - offset_); }

    std::optional<double> derivative(double x) const;

    FunctionSource shifted(double s) const;

    const OpenDomain& domain() const { return domain_; }
    bool is_grid() const { return spacing_ > 0.0; }
    /// Sample spacing for grid sources, 0 for analytic ones.
    double spacing() const { return spacing_; }
    double offset() const { return offset_; }
    const SourceInfo& info() const { return info_; }

    std::vector<double> breakpoints() const;
    std::optional<Interval> support() const;
    /// Round-trippable label such as "affine:2,0" or "square@shift=1".
    std::string label() const;

private:
    std::shared_ptr<const detail::Kernel> kernel_;
    OpenDomain domain_;
    SourceInfo info_;
    double spacing_ = 0.0;
    double offset_ = 0.0;
};

/// f_s(x) = f(x - s); the domain moves by +s.
FunctionSource shift(const FunctionSource& f, double s);

/// Partial sum sum_{n=1}^{terms} b^{-n} cos(b^n x) on the real line.
FunctionSource weierstrass_hardy(double b, int terms = 40);

struct ConeHeight {
    double x;
    double h0;
};

/// h0 = min(1, dist(x, R \ U) / 2).
ConeHeight cone_height(const FunctionSource& f, double x);

namespace builtin {

FunctionSource square();
FunctionSource cube();
FunctionSource abs();
FunctionSource abs_pow(double alpha);
FunctionSource hat();
FunctionSource gauss_sine(double k);
FunctionSource affine(double slope, double intercept = 0.0);
FunctionSource constant(double c);

}  // namespace builtin

/// Builtin by catalog id and parameter list.
FunctionSource make_builtin(std::string_view id, std::span<const double> params);
/// Comma-separated numbers, "1,0.5,-2".
std::vector<double> parse_number_list(std::string_view text);
/// Parses "id" or "id:p1,p2,...".
FunctionSource parse_function(std::string_view spec);
std::vector<std::string> builtin_ids();

/// Piecewise-linear interpolant of uniform samples; the domain is the open
/// hull (origin, origin + (n-1) spacing).
FunctionSource make_grid(std::vector<double> samples, double origin, double spacing);
/// Two-column CSV "x,f(x)", optional header, uniform x to relative 1e-9.
FunctionSource parse_grid_csv(std::istream& in);
FunctionSource load_grid_csv(const std::string& path);

}  // namespace sqlab
