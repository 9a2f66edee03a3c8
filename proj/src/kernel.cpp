#include "sqlab/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "sqlab/differences.hpp"
#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"

namespace sqlab {

PiecewiseKernel::PiecewiseKernel(std::string name, std::vector<KernelPiece> pieces, bool verified)
    : name_(std::move(name)), pieces_(std::move(pieces)), verified_(verified) {
    std::sort(pieces_.begin(), pieces_.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (!(p.lo < p.hi) || p.lo < -2.0 || p.hi > 2.0)
            throw BadParameter("kernel piece must satisfy -2 <= lo < hi <= 2");
        if (p.coeffs.empty()) throw BadParameter("kernel piece needs at least one coefficient");
        if (i > 0 && p.lo < pieces_[i - 1].hi) throw BadParameter("kernel pieces overlap");
    }
}

double PiecewiseKernel::operator()(double w) const {
    for (const auto& p : pieces_) {
        if (p.lo <= w && w <= p.hi) {
            double v = 0.0;
            for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) v = v * w + *it;
            return v;
        }
    }
    return 0.0;
}

std::string PiecewiseKernel::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["name"] = name_;
    j["verified"] = verified_;
    j["pieces"] = nlohmann::json::array();
    for (const auto& p : pieces_) j["pieces"].push_back({{"lo", p.lo}, {"hi", p.hi}, {"coeffs", p.coeffs}});
    return j.dump(2);
}

PiecewiseKernel PiecewiseKernel::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw BadParameter(std::string("kernel json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("pieces")) throw BadParameter("kernel json needs a 'pieces' array");
    for (const auto& [key, _] : j.items()) {
        if (key != "schema_version" && key != "name" && key != "verified" && key != "pieces")
            throw BadParameter("kernel json: unknown key '" + key + "'");
    }
    std::vector<KernelPiece> pieces;
    try {
        for (const auto& p : j.at("pieces"))
            pieces.push_back({p.at("lo").get<double>(), p.at("hi").get<double>(), p.at("coeffs").get<std::vector<double>>()});
    } catch (const nlohmann::json::exception& e) {
        throw BadParameter(std::string("kernel json: ") + e.what());
    }
    return PiecewiseKernel(j.value("name", std::string("custom")), std::move(pieces), j.value("verified", false));
}

namespace kernels {

PiecewiseKernel unit() { return PiecewiseKernel("unit", {{-2.0, 2.0, {1.0}}}); }

PiecewiseKernel box() { return PiecewiseKernel("box", {{-1.0, 1.0, {1.0}}}); }

PiecewiseKernel printed() {
    const std::vector<double> outer{-1.0 / 3.0, 0.0, 4.0 / 3.0};
    return PiecewiseKernel("printed", {{-2.0, -1.0, outer}, {-1.0, 1.0, {1.0}}, {1.0, 2.0, outer}}, false);
}

}  // namespace kernels

PiecewiseKernel kernel_by_name(std::string_view name) {
    if (name == "unit") return kernels::unit();
    if (name == "box") return kernels::box();
    if (name == "printed") return kernels::printed();
    throw BadParameter("unknown kernel '" + std::string(name) + "'");
}

double kernel_mean_dd(const FunctionSource& f, double x, double h, const PiecewiseKernel& K, const QuadratureSpec& q) {
    q.validate();
    if (!(h > 0.0)) throw BadParameter("kernel mean needs h > 0");
    if (!f.domain().contains(x)) throw OutOfDomain("x = " + fmt_num(x) + " outside domain");
    if (!f.domain().contains_open(x - 4.0 * h, x + 4.0 * h))
        throw OutOfDomain("kernel mean stencil (x - 4h, x + 4h) leaves the domain");
    if (f.is_grid() && 2.0 * h < 2.0 * f.spacing()) throw ScaleTooFine("kernel mean scale below grid resolution");
    const double t = 2.0 * h;
    double total = 0.0;
    // s = x + h w, ds = h dw; each polynomial piece is integrated separately.
    for (const auto& piece : K.pieces()) {
        auto g = [&](double w) { return detail::delta_raw(f, x + h * w, t) * K(w); };
        const Estimate e = integrate_1d(g, piece.lo, piece.hi, q, q.absolute_floor);
        if (!e.converged) throw NoConvergence("kernel mean quadrature did not reach tolerance", total + e.value / 4.0);
        total += e.value;
    }
    return total / 4.0;
}

}  // namespace sqlab
