#include "sqlab/funcspace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"

namespace sqlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join_params(const std::vector<double>& params) {
    std::string out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ',';
        out += fmt_num(params[i]);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- OpenDomain

OpenDomain::OpenDomain(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    for (const auto& iv : intervals_) {
        if (!(iv.lo < iv.hi)) throw BadParameter("domain interval must satisfy lo < hi");
    }
    std::sort(intervals_.begin(), intervals_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < intervals_.size(); ++i) {
        if (intervals_[i].lo < intervals_[i - 1].hi)
            throw BadParameter("domain intervals must be pairwise disjoint");
    }
}

OpenDomain OpenDomain::real_line() { return OpenDomain({{-kInf, kInf}}); }

OpenDomain OpenDomain::interval(double lo, double hi) { return OpenDomain({{lo, hi}}); }

bool OpenDomain::contains(double x) const {
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [x](const Interval& iv) { return iv.lo < x && x < iv.hi; });
}

bool OpenDomain::contains_open(double a, double b) const {
    if (a > b) std::swap(a, b);
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [a, b](const Interval& iv) { return iv.lo <= a && b <= iv.hi; });
}

bool OpenDomain::contains_closed(double a, double b) const {
    if (a > b) std::swap(a, b);
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [a, b](const Interval& iv) { return iv.lo < a && b < iv.hi; });
}

double OpenDomain::distance_to_complement(double x) const {
    for (const auto& iv : intervals_) {
        if (iv.lo < x && x < iv.hi) return std::min(x - iv.lo, iv.hi - x);
    }
    return 0.0;
}

OpenDomain OpenDomain::translated(double s) const {
    OpenDomain out;
    out.intervals_.reserve(intervals_.size());
    for (const auto& iv : intervals_) out.intervals_.push_back({iv.lo + s, iv.hi + s});
    return out;
}

bool OpenDomain::is_real_line() const {
    return intervals_.size() == 1 && std::isinf(intervals_[0].lo) && std::isinf(intervals_[0].hi);
}

std::string OpenDomain::describe() const {
    if (intervals_.empty()) return "empty";
    std::string out;
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        if (i) out += " U ";
        out += "(" + fmt_num(intervals_[i].lo) + "," + fmt_num(intervals_[i].hi) + ")";
    }
    return out;
}

// ----------------------------------------------------------- FunctionSource

FunctionSource::FunctionSource(std::shared_ptr<const detail::Kernel> kernel, OpenDomain domain,
                               SourceInfo info, double spacing)
    : kernel_(std::move(kernel)), domain_(std::move(domain)), info_(std::move(info)),
      spacing_(spacing) {
    if (!kernel_) throw BadParameter("function source needs a kernel");
    if (spacing_ < 0.0) throw BadParameter("grid spacing must be positive");
}

double FunctionSource::evaluate(double x) const {
    if (!domain_.contains(x))
        throw OutOfDomain("x = " + fmt_num(x) + " outside domain " + domain_.describe());
    return raw(x);
}

std::optional<double> FunctionSource::derivative(double x) const {
    if (!domain_.contains(x))
        throw OutOfDomain("x = " + fmt_num(x) + " outside domain " + domain_.describe());
    return kernel_->derivative(x - offset_);
}

FunctionSource FunctionSource::shifted(double s) const {
    FunctionSource out = *this;
    out.offset_ = offset_ + s;
    out.domain_ = domain_.translated(s);
    return out;
}

std::vector<double> FunctionSource::breakpoints() const {
    std::vector<double> out = info_.breakpoints;
    for (double& b : out) b += offset_;
    return out;
}

std::optional<Interval> FunctionSource::support() const {
    if (!info_.support) return std::nullopt;
    return Interval{info_.support->lo + offset_, info_.support->hi + offset_};
}

std::string FunctionSource::label() const {
    std::string out = info_.id;
    if (!info_.params.empty()) out += ":" + join_params(info_.params);
    if (offset_ != 0.0) out += "@shift=" + fmt_num(offset_);
    return out;
}

FunctionSource shift(const FunctionSource& f, double s) { return f.shifted(s); }

ConeHeight cone_height(const FunctionSource& f, double x) {
    if (!f.domain().contains(x))
        throw OutOfDomain("cone apex " + fmt_num(x) + " outside domain " + f.domain().describe());
    return {x, std::min(1.0, f.domain().distance_to_complement(x) / 2.0)};
}

// ------------------------------------------------------------------ builtins

namespace {

template <class Value, class Deriv>
class LambdaKernel final : public detail::Kernel {
public:
    LambdaKernel(Value v, Deriv d) : v_(std::move(v)), d_(std::move(d)) {}
    double value(double x) const override { return v_(x); }
    std::optional<double> derivative(double x) const override { return d_(x); }

private:
    Value v_;
    Deriv d_;
};

template <class Value, class Deriv>
FunctionSource analytic(SourceInfo info, Value v, Deriv d) {
    return FunctionSource(std::make_shared<LambdaKernel<Value, Deriv>>(std::move(v), std::move(d)),
                          OpenDomain::real_line(), std::move(info));
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

class WeierstrassKernel final : public detail::Kernel {
public:
    WeierstrassKernel(double b, int terms) {
        freq_.reserve(terms);
        double bn = 1.0;
        for (int n = 1; n <= terms; ++n) {
            bn *= b;
            freq_.push_back(bn);
        }
        if (b == std::floor(b) && b <= 64.0) power_ = static_cast<int>(b);
    }

    double value(double x) const override {
        if (power_ > 0) return value_by_powers(x);
        double sum = 0.0;
        // Smallest terms first.
        for (auto it = freq_.rbegin(); it != freq_.rend(); ++it) sum += std::cos(*it * x) / *it;
        return sum;
    }

private:
    // Integer b: z_n = exp(i b^n x) = z_{n-1}^b. The phase error of z_n grows
    // like b^n eps while the term weight is b^-n, so each term stays within a
    // few ulps of its exact contribution and no large argument reaches cos.
    double value_by_powers(double x) const {
        std::array<double, 64> terms;
        const std::size_t count = std::min<std::size_t>(freq_.size(), terms.size());
        double re = std::cos(x);
        double im = std::sin(x);
        for (std::size_t n = 0; n < count; ++n) {
            double pr = re * re - im * im;
            double pi = 2.0 * re * im;
            if (power_ > 2) {
                pr = 1.0;
                pi = 0.0;
                double br = re;
                double bi = im;
                for (int e = power_; e > 0; e >>= 1) {
                    if (e & 1) {
                        const double t = pr * br - pi * bi;
                        pi = pr * bi + pi * br;
                        pr = t;
                    }
                    const double t = br * br - bi * bi;
                    bi = 2.0 * br * bi;
                    br = t;
                }
            }
            // One Newton step toward |z| = 1.
            const double scale = 0.5 * (3.0 - (pr * pr + pi * pi));
            re = pr * scale;
            im = pi * scale;
            terms[n] = re / freq_[n];
        }
        double sum = 0.0;
        for (std::size_t n = freq_.size(); n > count; --n) sum += std::cos(freq_[n - 1] * x) / freq_[n - 1];
        for (std::size_t n = count; n > 0; --n) sum += terms[n - 1];
        return sum;
    }

    int power_ = 0;
    std::vector<double> freq_;
};

class GridKernel final : public detail::Kernel {
public:
    GridKernel(std::vector<double> samples, double origin, double spacing)
        : y_(std::move(samples)), x0_(origin), h_(spacing) {}

    double value(double x) const override {
        const double r = (x - x0_) / h_;
        const double last = static_cast<double>(y_.size() - 1);
        const double k = std::nearbyint(r);
        if (std::abs(r - k) <= 1e-12 * std::max(1.0, std::abs(r)) && k >= 0.0 && k <= last)
            return y_[static_cast<std::size_t>(k)];
        const double fl = std::clamp(std::floor(r), 0.0, last - 1.0);
        const auto i = static_cast<std::size_t>(fl);
        const double w = r - fl;
        return (1.0 - w) * y_[i] + w * y_[i + 1];
    }

private:
    std::vector<double> y_;
    double x0_;
    double h_;
};

}  // namespace

FunctionSource weierstrass_hardy(double b, int terms) {
    if (!(b > 1.0)) throw BadParameter("weierstrass-hardy needs b > 1");
    if (terms < 1) throw BadParameter("weierstrass-hardy needs at least one term");
    SourceInfo info{"weierstrass", {b, static_cast<double>(terms)}, {}, {}, {}};
    info.tail_bound = std::pow(b, -terms) / (b - 1.0);
    return FunctionSource(std::make_shared<WeierstrassKernel>(b, terms), OpenDomain::real_line(),
                          std::move(info));
}

namespace builtin {

FunctionSource square() {
    return analytic({"square", {}, {}, {}, {}}, [](double x) { return x * x; },
                    [](double x) -> std::optional<double> { return 2.0 * x; });
}

FunctionSource cube() {
    return analytic({"cube", {}, {}, {}, {}}, [](double x) { return x * x * x; },
                    [](double x) -> std::optional<double> { return 3.0 * x * x; });
}

FunctionSource abs() {
    return analytic({"abs", {}, {}, {0.0}, {}}, [](double x) { return std::abs(x); },
                    [](double x) -> std::optional<double> {
                        if (x == 0.0) return std::nullopt;
                        return sign(x);
                    });
}

FunctionSource abs_pow(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw BadParameter("abs-pow needs alpha in (0,2)");
    return analytic({"abs-pow", {alpha}, {}, {0.0}, {}},
                    [alpha](double x) { return std::pow(std::abs(x), alpha); },
                    [alpha](double x) -> std::optional<double> {
                        if (x == 0.0) return std::nullopt;
                        return alpha * std::pow(std::abs(x), alpha - 1.0) * sign(x);
                    });
}

FunctionSource hat() {
    return analytic({"hat", {}, {}, {-1.0, 0.0, 1.0}, Interval{-1.0, 1.0}},
                    [](double x) { return std::max(0.0, 1.0 - std::abs(x)); },
                    [](double x) -> std::optional<double> {
                        if (x == 0.0 || std::abs(x) == 1.0) return std::nullopt;
                        return std::abs(x) < 1.0 ? -sign(x) : 0.0;
                    });
}

FunctionSource gauss_sine(double k) {
    // e^{-36} is below double resolution relative to the peak, so [-6, 6]
    // serves as the support for norm computations.
    return analytic({"gauss-sine", {k}, {}, {}, Interval{-6.0, 6.0}},
                    [k](double x) { return std::exp(-x * x) * std::sin(k * x); },
                    [k](double x) -> std::optional<double> {
                        return std::exp(-x * x) * (k * std::cos(k * x) - 2.0 * x * std::sin(k * x));
                    });
}

FunctionSource affine(double slope, double intercept) {
    return analytic({"affine", {slope, intercept}, {}, {}, {}},
                    [slope, intercept](double x) { return slope * x + intercept; },
                    [slope](double) -> std::optional<double> { return slope; });
}

FunctionSource constant(double c) {
    return analytic({"constant", {c}, {}, {}, {}}, [c](double) { return c; },
                    [](double) -> std::optional<double> { return 0.0; });
}

}  // namespace builtin

namespace {

void expect_params(std::string_view id, std::span<const double> p, std::size_t lo, std::size_t hi) {
    if (p.size() < lo || p.size() > hi)
        throw BadParameter("builtin '" + std::string(id) + "' takes " + std::to_string(lo) +
                           (hi != lo ? ".." + std::to_string(hi) : std::string()) + " parameters, got " +
                           std::to_string(p.size()));
}

}  // namespace

FunctionSource make_builtin(std::string_view id, std::span<const double> p) {
    if (id == "square") return expect_params(id, p, 0, 0), builtin::square();
    if (id == "cube") return expect_params(id, p, 0, 0), builtin::cube();
    if (id == "abs") return expect_params(id, p, 0, 0), builtin::abs();
    if (id == "hat") return expect_params(id, p, 0, 0), builtin::hat();
    if (id == "abs-pow") return expect_params(id, p, 1, 1), builtin::abs_pow(p[0]);
    if (id == "gauss-sine") return expect_params(id, p, 1, 1), builtin::gauss_sine(p[0]);
    if (id == "affine") {
        expect_params(id, p, 1, 2);
        return builtin::affine(p[0], p.size() > 1 ? p[1] : 0.0);
    }
    if (id == "constant") return expect_params(id, p, 1, 1), builtin::constant(p[0]);
    if (id == "weierstrass") {
        expect_params(id, p, 1, 2);
        double terms = p.size() > 1 ? p[1] : 40.0;
        if (terms != std::floor(terms)) throw BadParameter("weierstrass term count must be an integer");
        return weierstrass_hardy(p[0], static_cast<int>(terms));
    }
    throw BadParameter("unknown builtin '" + std::string(id) + "'");
}

std::vector<double> parse_number_list(std::string_view text) {
    std::vector<double> out;
    while (!text.empty()) {
        auto comma = text.find(',');
        std::string tok(text.substr(0, comma));
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size())
            throw BadParameter("not a number: '" + tok + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

FunctionSource parse_function(std::string_view spec) {
    auto colon = spec.find(':');
    std::string_view id = spec.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string_view::npos) params = parse_number_list(spec.substr(colon + 1));
    return make_builtin(id, params);
}

std::vector<std::string> builtin_ids() {
    return {"square", "cube", "abs", "abs-pow", "hat", "gauss-sine", "affine", "constant", "weierstrass"};
}

// ---------------------------------------------------------------------- grid

FunctionSource make_grid(std::vector<double> samples, double origin, double spacing) {
    if (!(spacing > 0.0)) throw BadParameter("grid spacing must be > 0");
    if (samples.size() < 2) throw BadParameter("grid needs at least 2 samples");
    const double hi = origin + spacing * static_cast<double>(samples.size() - 1);
    SourceInfo info{"grid", {origin, spacing, static_cast<double>(samples.size())}, {}, {}, {}};
    return FunctionSource(std::make_shared<GridKernel>(std::move(samples), origin, spacing),
                          OpenDomain::interval(origin, hi), std::move(info), spacing);
}

FunctionSource parse_grid_csv(std::istream& in) {
    std::vector<double> xs;
    std::vector<double> ys;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x = 0.0;
        double y = 0.0;
        if (!(row >> x >> y)) {
            if (xs.empty() && lineno == 1) continue;  // header
            throw BadParameter("grid csv: cannot parse line " + std::to_string(lineno));
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < 2) throw BadParameter("grid csv needs at least 2 samples");
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    if (!(h > 0.0)) throw BadParameter("grid csv: x must increase");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (std::abs((xs[i] - xs[i - 1]) - h) > 1e-9 * h)
            throw BadParameter("grid csv: non-uniform spacing at line " + std::to_string(i + 1));
    }
    return make_grid(std::move(ys), xs.front(), h);
}

FunctionSource load_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadParameter("cannot open grid csv '" + path + "'");
    return parse_grid_csv(in);
}

}  // namespace sqlab
