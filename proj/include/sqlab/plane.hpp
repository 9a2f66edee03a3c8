#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlab/funcspace.hpp"

namespace sqlab {

struct Vec2 {
    double x;
    double y;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double t, Vec2 v) { return {t * v.x, t * v.y}; }

/// Unit vector (cos theta, sin theta).
Vec2 direction(double theta);

/// Open axis-aligned rectangle (possibly unbounded), the domain of a
/// two-variable function.
struct Rect2 {
    double x_lo, x_hi, y_lo, y_hi;

    static Rect2 plane();
    bool contains(Vec2 p) const;
    double distance_to_complement(Vec2 p) const;
    /// Open parameter interval {s : p + s xi in the rectangle}.
    Interval line_section(Vec2 p, Vec2 xi) const;
};

namespace detail {

class Kernel2 {
public:
    virtual ~Kernel2() = default;
    virtual double value(double x, double y) const = 0;
};

}  // namespace detail

class Function2D {
public:
    Function2D(std::shared_ptr<const detail::Kernel2> kernel, Rect2 domain, std::string label);

    double evaluate(Vec2 p) const;
    double raw(Vec2 p) const { return kernel_->value(p.x, p.y); }
    const Rect2& domain() const { return domain_; }
    const std::string& label() const { return label_; }

    /// h0 = min(1, dist(p, complement) / 2).
    double cone_height(Vec2 p) const;

    /// The one-variable function s -> f(p + s xi) on its open line section.
    FunctionSource restrict_to_line(Vec2 p, Vec2 xi) const;

private:
    std::shared_ptr<const detail::Kernel2> kernel_;
    Rect2 domain_;
    std::string label_;
};

namespace builtin2 {

/// f(x, y) = x^2
Function2D x_squared();
/// f(x, y) = x^2 + y^2
Function2D radial_square();
/// f(x, y) = a x + b y + c
Function2D affine(double a, double b, double c = 0.0);
/// f(x, y) = exp(-x^2 - y^2) sin(k x)
Function2D gauss_sine(double k);

}  // namespace builtin2

/// "x2", "radial2", "affine2:a,b[,c]", "gauss-sine2:k".
Function2D parse_function2d(std::string_view spec);

}  // namespace sqlab
