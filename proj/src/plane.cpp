#include "sqlab/plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"

namespace sqlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
class LambdaKernel2 final : public detail::Kernel2 {
public:
    explicit LambdaKernel2(F f) : f_(std::move(f)) {}
    double value(double x, double y) const override { return f_(x, y); }

private:
    F f_;
};

template <class F>
Function2D make2(std::string label, F f) {
    return Function2D(std::make_shared<LambdaKernel2<F>>(std::move(f)), Rect2::plane(), std::move(label));
}

class LineKernel final : public detail::Kernel {
public:
    LineKernel(std::shared_ptr<const detail::Kernel2> k, Vec2 p, Vec2 xi)
        : k_(std::move(k)), p_(p), xi_(xi) {}
    double value(double s) const override { return k_->value(p_.x + s * xi_.x, p_.y + s * xi_.y); }

private:
    std::shared_ptr<const detail::Kernel2> k_;
    Vec2 p_;
    Vec2 xi_;
};

// Parameter interval of p + s*d inside (lo, hi) along one coordinate.
void clip(double p, double d, double lo, double hi, double& s_lo, double& s_hi) {
    if (d == 0.0) {
        if (!(lo < p && p < hi)) {
            s_lo = 0.0;
            s_hi = 0.0;
        }
        return;
    }
    double a = (lo - p) / d;
    double b = (hi - p) / d;
    if (a > b) std::swap(a, b);
    s_lo = std::max(s_lo, a);
    s_hi = std::min(s_hi, b);
}

}  // namespace

Vec2 direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

Rect2 Rect2::plane() { return {-kInf, kInf, -kInf, kInf}; }

bool Rect2::contains(Vec2 p) const { return x_lo < p.x && p.x < x_hi && y_lo < p.y && p.y < y_hi; }

double Rect2::distance_to_complement(Vec2 p) const {
    if (!contains(p)) return 0.0;
    return std::min({p.x - x_lo, x_hi - p.x, p.y - y_lo, y_hi - p.y});
}

Interval Rect2::line_section(Vec2 p, Vec2 xi) const {
    double lo = -kInf;
    double hi = kInf;
    clip(p.x, xi.x, x_lo, x_hi, lo, hi);
    clip(p.y, xi.y, y_lo, y_hi, lo, hi);
    return {lo, hi};
}

Function2D::Function2D(std::shared_ptr<const detail::Kernel2> kernel, Rect2 domain, std::string label)
    : kernel_(std::move(kernel)), domain_(domain), label_(std::move(label)) {
    if (!kernel_) throw BadParameter("two-variable function needs a kernel");
}

double Function2D::evaluate(Vec2 p) const {
    if (!domain_.contains(p))
        throw OutOfDomain("point (" + fmt_num(p.x) + "," + fmt_num(p.y) + ") outside domain");
    return raw(p);
}

double Function2D::cone_height(Vec2 p) const {
    if (!domain_.contains(p))
        throw OutOfDomain("cone apex (" + fmt_num(p.x) + "," + fmt_num(p.y) + ") outside domain");
    return std::min(1.0, domain_.distance_to_complement(p) / 2.0);
}

FunctionSource Function2D::restrict_to_line(Vec2 p, Vec2 xi) const {
    const double norm = std::hypot(xi.x, xi.y);
    if (std::abs(norm - 1.0) > 1e-12) throw BadParameter("direction must be a unit vector");
    Interval sec = domain_.line_section(p, xi);
    if (!(sec.lo < sec.hi)) throw OutOfDomain("line misses the domain");
    SourceInfo info{label_ + "|line", {p.x, p.y, xi.x, xi.y}, {}, {}, {}};
    return FunctionSource(std::make_shared<LineKernel>(kernel_, p, xi), OpenDomain({sec}), std::move(info));
}

namespace builtin2 {

Function2D x_squared() {
    return make2("x2", [](double x, double) { return x * x; });
}

Function2D radial_square() {
    return make2("radial2", [](double x, double y) { return x * x + y * y; });
}

Function2D affine(double a, double b, double c) {
    return make2("affine2:" + fmt_num(a) + "," + fmt_num(b) + "," + fmt_num(c),
                 [a, b, c](double x, double y) { return a * x + b * y + c; });
}

Function2D gauss_sine(double k) {
    return make2("gauss-sine2:" + fmt_num(k),
                 [k](double x, double y) { return std::exp(-x * x - y * y) * std::sin(k * x); });
}

}  // namespace builtin2

Function2D parse_function2d(std::string_view spec) {
    auto colon = spec.find(':');
    std::string_view id = spec.substr(0, colon);
    std::vector<double> p;
    if (colon != std::string_view::npos) p = parse_number_list(spec.substr(colon + 1));
    if (id == "x2" && p.empty()) return builtin2::x_squared();
    if (id == "radial2" && p.empty()) return builtin2::radial_square();
    if (id == "affine2" && (p.size() == 2 || p.size() == 3))
        return builtin2::affine(p[0], p[1], p.size() == 3 ? p[2] : 0.0);
    if (id == "gauss-sine2" && p.size() == 1) return builtin2::gauss_sine(p[0]);
    throw BadParameter("unknown two-variable builtin '" + std::string(spec) + "'");
}

}  // namespace sqlab
