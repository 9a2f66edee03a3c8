#include "sqlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "sqlab/differences.hpp"
#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"
#include "sqlab/martingale.hpp"
#include "sqlab/parallel.hpp"
#include "sqlab/sqfn.hpp"

namespace sqlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double relative_error(double a, double b, double floor) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Fields quad_fields(const QuadratureSpec& q, const std::string& prefix = "") {
    Fields f;
    f.set(prefix + "nodes", std::int64_t{q.nodes});
    f.set(prefix + "tolerance", q.tolerance);
    f.set(prefix + "max_levels", std::int64_t{q.max_levels});
    f.set(prefix + "absolute_floor", q.absolute_floor);
    f.set(prefix + "max_bands", std::int64_t{q.max_bands});
    return f;
}

// (rho, s) average of a functional of the path S_0..S_N(f_s)(x + s). The
// s-range is split into `panels` consecutive generation-N intervals
// starting at a grid alignment of x + s, so every panel sees a smooth
// integrand; `panels` must make up a whole period of the functional.
template <class PathFn>
double martingale_average(const FunctionSource& f, double x, double y, int rho_nodes, int s_nodes, bool full_period,
                          PathFn&& reduce) {
    const NormalizedHeight nh = normalizer_H(y);
    const GaussRule gr = gauss_legendre(rho_nodes);
    const GaussRule gs = gauss_legendre(s_nodes);
    const double H = nh.H;
    const std::size_t panels = full_period ? (std::size_t{1} << nh.N) : 1;
    double outer = 0.0;
    for (int a = 0; a < rho_nodes; ++a) {
        const double rho = 1.5 * H + 0.5 * H * gr.nodes[a];
        const double len = std::ldexp(rho, -nh.N);
        double s0 = std::ceil(x / len) * len - x;
        if (s0 >= len) s0 -= len;
        double inner = 0.0;
        for (std::size_t p = 0; p < panels; ++p) {
            const double start = s0 + static_cast<double>(p) * len;
            for (int b = 0; b < s_nodes; ++b) {
                const double s = start + 0.5 * len * (1.0 + gs.nodes[b]);
                const FunctionSource fs = shift(f, s);
                const DyadicGrid grid = DyadicGrid::containing(rho, 0.0, x + s);
                inner += 0.5 * gs.weights[b] * reduce(path_values(fs, grid, x + s, nh.N));
            }
        }
        outer += 0.5 * H * gr.weights[a] * inner / static_cast<double>(panels) / rho;
    }
    return outer;
}

template <class PathFn>
IdentityResult identity_rhs(const FunctionSource& f, double x, double y, const IdentitySpec& spec, bool full_period,
                            PathFn&& reduce) {
    IdentityResult r;
    int nr = spec.rho_nodes;
    int ns = spec.s_nodes;
    double prev = martingale_average(f, x, y, nr, ns, full_period, reduce);
    for (int level = 1; level <= spec.max_refinements; ++level) {
        nr *= 2;
        ns *= 2;
        const double cur = martingale_average(f, x, y, nr, ns, full_period, reduce);
        r.rhs_previous = prev;
        r.rhs = cur;
        r.rho_nodes = nr;
        r.s_nodes = ns;
        if (std::abs(cur - prev) <= spec.tolerance * std::abs(cur) + spec.absolute_floor) {
            r.rhs_converged = true;
            return r;
        }
        prev = cur;
    }
    throw NoConvergence("martingale average still changing after " + std::to_string(spec.max_refinements) +
                            " doublings",
                        prev);
}

void check_identity_inputs(const FunctionSource& f, double x, const IdentitySpec& spec) {
    spec.validate();
    if (!std::isfinite(x)) throw BadParameter("x must be finite");
    if (!f.domain().is_real_line()) throw BadParameter("identity checks need a function defined on the real line");
}

}  // namespace

void IdentitySpec::validate() const {
    lhs.validate();
    if (rho_nodes < 2 || s_nodes < 2) throw BadParameter("identity rule needs at least 2 nodes per axis");
    if (!(tolerance > 0.0)) throw BadParameter("identity tolerance must be > 0");
    if (max_refinements < 1 || max_refinements > 8) throw BadParameter("identity refinements must lie in [1, 8]");
}

IdentityResult check_identity_a(const FunctionSource& f, double x, double y, const IdentitySpec& spec) {
    check_identity_inputs(f, x, spec);
    if (!(y > 0.0 && y < 2.0)) throw BadParameter("identity (a) needs 0 < y < 2");
    IdentityResult r = identity_rhs(f, x, y, spec, false, [](const std::vector<double>& path) { return path.back(); });
    r.lhs = averaged_difference(f, x, y, spec.lhs);
    r.rel_error = relative_error(r.lhs, r.rhs, spec.absolute_floor);
    return r;
}

IdentityResult check_identity_b(const FunctionSource& f, double x, double y, const IdentitySpec& spec) {
    check_identity_inputs(f, x, spec);
    if (!(y > 0.0 && y < 1.0)) throw BadParameter("identity (b) needs 0 < y < 1");
    auto qv = [](const std::vector<double>& path) {
        double sum = 0.0;
        for (std::size_t k = 1; k < path.size(); ++k) sum += (path[k] - path[k - 1]) * (path[k] - path[k - 1]);
        return sum;
    };
    IdentityResult r = identity_rhs(f, x, y, spec, true, qv);
    r.lhs = tilde_A2(f, x, y, spec.lhs);
    r.rel_error = relative_error(r.lhs, r.rhs, spec.absolute_floor);
    return r;
}

// -------------------------------------------------------------- good lambda

std::vector<GoodLambdaPoint> good_lambda_points(const FunctionSource& f, Interval I, double h,
                                                const GoodLambdaSpec& spec) {
    spec.quad.validate();
    if (!(h > 0.0 && h < 1.0)) throw BadParameter("good lambda needs 0 < h < 1");
    if (!(I.lo < I.hi)) throw BadParameter("good lambda needs a nonempty interval");
    if (spec.samples < 1 || spec.y_per_octave < 1) throw BadParameter("good lambda needs samples, y_per_octave >= 1");
    std::vector<double> ys;
    const int steps = static_cast<int>(std::floor(spec.y_per_octave * std::log2(1.0 / h) + 1e-9));
    for (int i = 0; i <= steps; ++i) ys.push_back(h * std::exp2(static_cast<double>(i) / spec.y_per_octave));
    if (ys.back() < 1.0) ys.push_back(1.0);
    ys.back() = std::min(ys.back(), 1.0);

    const auto xs = uniform_samples(I.lo, I.hi, spec.samples);
    return parallel_map<GoodLambdaPoint>(xs.size(), spec.threads, [&](std::size_t i) {
        const double x = xs[i];
        std::map<double, double> at_H;
        GoodLambdaPoint p;
        p.x = x;
        p.sup_gap = -std::numeric_limits<double>::infinity();
        auto best = [&](auto&& compute) {
            try {
                return compute();
            } catch (const NoConvergence& e) {
                p.quadrature_warning = true;
                return e.partial();
            }
        };
        for (double y : ys) {
            const double H = normalizer_H(y).H;
            auto it = at_H.find(H);
            if (it == at_H.end())
                it = at_H.emplace(H, best([&] { return averaged_difference(f, x, H, spec.quad); })).first;
            const double low = (y == H) ? it->second : best([&] { return averaged_difference(f, x, y, spec.quad); });
            p.sup_gap = std::max(p.sup_gap, low - it->second);
        }
        p.tilde_a2 = best([&] { return tilde_A2(f, x, h, spec.quad); });
        return p;
    });
}

GoodLambdaResult good_lambda_measure(std::span<const GoodLambdaPoint> points, Interval I, double M, double N) {
    if (!(M > 0.0 && N > 0.0)) throw PreconditionFailed("good lambda needs M, N > 0");
    if (!(M * M > 4.0 * N)) throw PreconditionFailed("good lambda needs M^2 > 4N");
    if (points.empty()) throw BadParameter("good lambda needs sample points");
    GoodLambdaResult r;
    r.M = M;
    r.N = N;
    for (const auto& p : points)
        if (p.sup_gap >= M && p.tilde_a2 <= N) ++r.count;
    const double len = I.hi - I.lo;
    r.measure = static_cast<double>(r.count) / static_cast<double>(points.size()) * len;
    r.bound_shape = M * M / (2.0 * N) * std::exp(-M * M / (2.0 * N * std::log(4.0))) * len;
    r.fitted_C = r.bound_shape > 0.0 ? r.measure / r.bound_shape : (r.measure > 0.0 ? kNaN : 0.0);
    return r;
}

GoodLambdaResult good_lambda_measure(const FunctionSource& f, Interval I, double M, double N, double h,
                                     const GoodLambdaSpec& spec) {
    if (!(M * M > 4.0 * N)) throw PreconditionFailed("good lambda needs M^2 > 4N");
    const auto pts = good_lambda_points(f, I, h, spec);
    return good_lambda_measure(pts, I, M, N);
}

// ---------------------------------------------------------------------- LIL

double lil_constant() { return std::sqrt(2.0 * std::numbers::ln2); }

LilResult lil_profile(const FunctionSource& f, std::span<const double> xs, const LilSpec& spec) {
    spec.quad.validate();
    if (spec.j_min < 1 || spec.j_max < spec.j_min) throw BadParameter("LIL needs 1 <= j_min <= j_max");
    auto per_x = parallel_map<std::vector<RatioStatistic>>(xs.size(), spec.threads, [&](std::size_t i) {
        const double x = xs[i];
        const SquareProfile prof = square_profile(f, x, spec.j_min, spec.j_max, spec.quad);
        std::vector<RatioStatistic> rows;
        for (std::size_t k = 0; k < prof.levels.size(); ++k) {
            RatioStatistic r;
            r.x = x;
            r.j = prof.levels[k];
            r.h = prof.heights[k];
            r.a2 = prof.values[k];
            try {
                r.numerator = std::abs(mean_divided_diff(f, x, r.h, spec.quad));
            } catch (const NoConvergence& e) {
                r.numerator = std::abs(e.partial());
                r.quadrature_warning = true;
            }
            r.quadrature_warning = r.quadrature_warning || prof.quadrature_warning;
            r.pre_asymptotic = !(r.a2 > std::numbers::e);
            if (!r.pre_asymptotic) {
                r.denominator = std::sqrt(r.a2 * std::log(std::log(r.a2)));
                r.ratio = r.numerator / r.denominator;
            }
            rows.push_back(r);
        }
        return rows;
    });
    LilResult out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        LilPoint p;
        p.x = xs[i];
        p.max_ratio = kNaN;
        for (const auto& r : per_x[i]) {
            if (r.pre_asymptotic) continue;
            ++p.admissible;
            p.max_ratio = std::isnan(p.max_ratio) ? r.ratio : std::max(p.max_ratio, r.ratio);
        }
        out.points.push_back(p);
        out.records.insert(out.records.end(), per_x[i].begin(), per_x[i].end());
    }
    return out;
}

// ------------------------------------------------------------ Zygmund growth

std::vector<GrowthFit> zygmund_growth(const FunctionSource& f, std::span<const double> xs, const GrowthSpec& spec) {
    spec.quad.validate();
    if (spec.j_min < 0 || spec.j_max < spec.j_min + 1) throw BadParameter("growth fit needs j_max > j_min >= 0");
    return parallel_map<GrowthFit>(xs.size(), spec.threads, [&](std::size_t i) {
        const SquareProfile prof = square_profile(f, xs[i], spec.j_min, spec.j_max, spec.quad);
        std::vector<double> js;
        for (int j : prof.levels) js.push_back(j * std::numbers::ln2);
        const LinearFit fit = fit_line(js, prof.values);
        GrowthFit g;
        g.x = xs[i];
        g.slope = fit.slope;
        g.intercept = fit.intercept;
        g.r2 = fit.r2;
        g.diverging = prof.diverging;
        g.values = prof.values;
        return g;
    });
}

// ------------------------------------------------------------------ Sobolev

void SobolevSpec::validate() const {
    quad.validate();
    if (panel_nodes < 2) throw BadParameter("Sobolev panels need at least 2 nodes");
    if (!(panel_width > 0.0)) throw BadParameter("Sobolev panel width must be > 0");
    if (grading_levels < 0 || grading_levels > 40) throw BadParameter("grading levels must lie in [0, 40]");
}

namespace {

struct Node {
    double x;
    double w;
};

void add_panel(std::vector<Node>& out, const GaussRule& g, double a, double b, double max_width) {
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-12)));
    const double step = (b - a) / pieces;
    for (int k = 0; k < pieces; ++k) {
        const double lo = a + k * step;
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            out.push_back({lo + 0.5 * step * (1.0 + g.nodes[i]), 0.5 * step * g.weights[i]});
    }
}

// Geometric panels on [a, a + w] (toward a when dir > 0) or [a - w, a].
void add_graded(std::vector<Node>& out, const GaussRule& g, double a, double w, int dir, int levels,
                double max_width) {
    double far = w;
    for (int k = 0; k < levels; ++k) {
        const double near = far / 2.0;
        if (dir > 0)
            add_panel(out, g, a + near, a + far, max_width);
        else
            add_panel(out, g, a - far, a - near, max_width);
        far = near;
    }
    if (dir > 0)
        add_panel(out, g, a, a + far, max_width);
    else
        add_panel(out, g, a - far, a, max_width);
}

std::vector<Node> sobolev_nodes(const FunctionSource& f, int panel_nodes, double panel_width, int levels) {
    const Interval sup = *f.support();
    const double lo = sup.lo - 2.0;
    const double hi = sup.hi + 2.0;
    std::vector<double> singular;
    std::vector<double> cuts{lo, hi};
    for (double b : f.breakpoints()) {
        if (b < lo || b > hi) continue;
        singular.push_back(b);
        for (double d : {-2.0, -1.0, 0.0, 1.0, 2.0})
            if (b + d > lo && b + d < hi) cuts.push_back(b + d);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               cuts.end());
    auto is_singular = [&](double c) {
        return std::any_of(singular.begin(), singular.end(), [c](double s) { return std::abs(s - c) < 1e-12; });
    };
    const GaussRule g = gauss_legendre(panel_nodes);
    std::vector<Node> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        const bool sa = is_singular(a);
        const bool sb = is_singular(b);
        if (sa && sb) {
            const double m = 0.5 * (a + b);
            add_graded(out, g, a, m - a, +1, levels, panel_width);
            add_graded(out, g, b, b - m, -1, levels, panel_width);
        } else if (sa) {
            add_graded(out, g, a, b - a, +1, levels, panel_width);
        } else if (sb) {
            add_graded(out, g, b, b - a, -1, levels, panel_width);
        } else {
            add_panel(out, g, a, b, panel_width);
        }
    }
    return out;
}

struct NormPair {
    double A;
    double df;
};

std::vector<NormPair> sobolev_norms(const FunctionSource& f, std::span<const double> ps, int panel_nodes,
                                    double panel_width, int levels, const QuadratureSpec& q, int threads) {
    const auto nodes = sobolev_nodes(f, panel_nodes, panel_width, levels);
    struct Sample {
        double A;
        double df;
    };
    const auto samples = parallel_map<Sample>(nodes.size(), threads, [&](std::size_t i) {
        const double x = nodes[i].x;
        const auto d = f.derivative(x);
        if (!d) throw BadParameter("Sobolev comparison needs a known derivative for " + f.label());
        return Sample{std::sqrt(std::max(0.0, conical_A2(f, x, 0.0, q))), *d};
    });
    std::vector<NormPair> out;
    for (double p : ps) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            a += nodes[i].w * std::pow(samples[i].A, p);
            d += nodes[i].w * std::pow(std::abs(samples[i].df), p);
        }
        out.push_back({std::pow(a, 1.0 / p), std::pow(d, 1.0 / p)});
    }
    return out;
}

double safe_ratio(double a, double b) {
    if (b == 0.0) return a == 0.0 ? kNaN : std::numeric_limits<double>::infinity();
    return a / b;
}

}  // namespace

SobolevResult sobolev_compare(std::span<const FunctionSource> family, std::span<const double> ps,
                              const SobolevSpec& spec) {
    spec.validate();
    for (double p : ps)
        if (!(p > 1.0) || !std::isfinite(p)) throw BadParameter("Sobolev exponents must lie in (1, inf)");
    for (const auto& f : family) {
        if (!f.support()) throw BadParameter("Sobolev comparison needs compact support: " + f.label());
        if (!f.domain().is_real_line()) throw BadParameter("Sobolev comparison needs a function on the real line");
    }
    SobolevResult out;
    QuadratureSpec fine = spec.quad;
    fine.tolerance = spec.quad.tolerance / 4.0;
    for (const auto& f : family) {
        const auto base = sobolev_norms(f, ps, spec.panel_nodes, spec.panel_width, spec.grading_levels, spec.quad,
                                        spec.threads);
        std::vector<NormPair> refined;
        if (spec.refine)
            refined = sobolev_norms(f, ps, 2 * spec.panel_nodes, spec.panel_width / 2.0, spec.grading_levels + 4,
                                    fine, spec.threads);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            SobolevRow row;
            row.function = f.label();
            row.p = ps[i];
            row.norm_A = base[i].A;
            row.norm_df = base[i].df;
            row.ratio = safe_ratio(row.norm_A, row.norm_df);
            if (spec.refine) {
                row.ratio_refined = safe_ratio(refined[i].A, refined[i].df);
                row.refinement_change = std::isfinite(row.ratio) && row.ratio != 0.0
                                            ? std::abs(row.ratio_refined - row.ratio) / std::abs(row.ratio)
                                            : kNaN;
            } else {
                row.ratio_refined = kNaN;
                row.refinement_change = kNaN;
            }
            out.rows.push_back(row);
        }
    }
    for (double p : ps) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const auto& r : out.rows) {
            if (r.p != p || !std::isfinite(r.ratio)) continue;
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
        }
        out.spread.push_back(hi > 0.0 && std::isfinite(lo) ? hi / lo : kNaN);
    }
    return out;
}

// ------------------------------------------------------------- classifier

ClassifyResult classify_differentiability(const FunctionSource& f, std::span<const double> xs,
                                          const ClassifySpec& spec) {
    spec.quad.validate();
    if (spec.j_min < 1 || spec.j_max < spec.j_min) throw BadParameter("classifier needs 1 <= j_min <= j_max");
    if (!(spec.derivative_tol > 0.0) || !(spec.delta2_bound > 0.0))
        throw BadParameter("classifier thresholds must be > 0");
    ClassifyResult out;
    out.labels = parallel_map<PointLabel>(xs.size(), spec.threads, [&](std::size_t i) {
        PointLabel p;
        p.x = xs[i];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int j = spec.j_min; j <= spec.j_max; ++j) {
            const double t = std::ldexp(1.0, -j);
            const double d = delta(f, p.x, t);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            p.delta2_sup = std::max(p.delta2_sup, std::abs(delta2(f, p.x, t)));
        }
        p.oscillation = hi - lo;
        p.diverging = square_profile(f, p.x, spec.profile_j_min, spec.profile_j_max, spec.quad).diverging;
        const bool bounded = p.delta2_sup < spec.delta2_bound;
        p.a_label = p.oscillation < spec.derivative_tol && bounded;
        p.b_label = bounded && !p.diverging;
        return p;
    });
    std::size_t agree = 0;
    std::size_t both_false = 0;
    for (const auto& p : out.labels) {
        if (p.a_label == p.b_label) ++agree;
        if (!p.a_label && !p.b_label) ++both_false;
    }
    const double n = static_cast<double>(std::max<std::size_t>(out.labels.size(), 1));
    out.agreement = static_cast<double>(agree) / n;
    out.both_false = static_cast<double>(both_false) / n;
    return out;
}

// ---------------------------------------------------------------- helpers

std::vector<double> uniform_samples(double lo, double hi, int n) {
    if (n < 1 || !(lo < hi)) throw BadParameter("uniform samples need n >= 1 and lo < hi");
    std::vector<double> xs(static_cast<std::size_t>(n));
    const double step = (hi - lo) / n;
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo + (i + 0.5) * step;
    return xs;
}

std::vector<double> random_samples(double lo, double hi, int n, std::uint64_t seed) {
    if (n < 1 || !(lo < hi)) throw BadParameter("random samples need n >= 1 and lo < hi");
    std::mt19937_64 rng(seed);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = lo + (hi - lo) * std::ldexp(static_cast<double>(rng() >> 11), -53);
    return xs;
}

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw BadParameter("line fit needs two or more matching points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LinearFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    if (syy > 0.0 && sxx > 0.0) fit.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return fit;
}

// ---------------------------------------------------------------- reports

ExperimentReport identity_report(const std::string& which, const FunctionSource& f, std::span<const double> xs,
                                 std::span<const double> ys, std::span<const IdentityResult> results,
                                 const IdentitySpec& spec) {
    ExperimentReport rep;
    rep.experiment = "identity-" + which;
    rep.inputs.set("function", f.label());
    rep.inputs.set("which", which);
    rep.tolerances = quad_fields(spec.lhs, "lhs_");
    rep.tolerances.set("rho_nodes", std::int64_t{spec.rho_nodes});
    rep.tolerances.set("s_nodes", std::int64_t{spec.s_nodes});
    rep.tolerances.set("rhs_tolerance", spec.tolerance);
    rep.tolerances.set("max_refinements", std::int64_t{spec.max_refinements});
    double worst = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        Fields row;
        row.set("x", xs[i]).set("y", ys[i]).set("lhs", r.lhs).set("rhs", r.rhs).set("rel_error", r.rel_error);
        row.set("rho_nodes", std::int64_t{r.rho_nodes}).set("s_nodes", std::int64_t{r.s_nodes});
        row.set("rhs_converged", r.rhs_converged);
        rep.records.push_back(std::move(row));
        worst = std::max(worst, r.rel_error);
    }
    rep.summary.set("count", static_cast<std::int64_t>(results.size()));
    rep.summary.set("max_rel_error", worst);
    rep.verdicts.emplace_back("rel_error_below_1e-3", worst < 1e-3);
    return rep;
}

ExperimentReport good_lambda_report(const FunctionSource& f, Interval I, double h,
                                    std::span<const GoodLambdaPoint> points, std::span<const GoodLambdaResult> curve,
                                    const GoodLambdaSpec& spec) {
    ExperimentReport rep;
    rep.experiment = "goodlambda";
    rep.inputs.set("function", f.label()).set("I_lo", I.lo).set("I_hi", I.hi).set("h", h);
    rep.inputs.set("samples", std::int64_t{spec.samples}).set("y_per_octave", std::int64_t{spec.y_per_octave});
    rep.tolerances = quad_fields(spec.quad);
    for (const auto& c : curve) {
        Fields row;
        row.set("M", c.M).set("N", c.N).set("measure", c.measure).set("count", c.count);
        row.set("bound_shape", c.bound_shape).set("fitted_C", c.fitted_C);
        rep.records.push_back(std::move(row));
    }
    double max_gap = 0.0;
    double max_t = 0.0;
    std::int64_t warnings = 0;
    for (const auto& p : points) {
        max_gap = std::max(max_gap, p.sup_gap);
        max_t = std::max(max_t, p.tilde_a2);
        warnings += p.quadrature_warning ? 1 : 0;
    }
    rep.summary.set("max_sup_gap", max_gap).set("max_tilde_a2", max_t).set("quadrature_warnings", warnings);
    double fitted = 0.0;
    for (const auto& c : curve)
        if (std::isfinite(c.fitted_C)) fitted = std::max(fitted, c.fitted_C);
    rep.summary.set("fitted_C", fitted);
    // Monotone in M for each fixed N, in N for each fixed M.
    bool monotone = true;
    for (const auto& a : curve)
        for (const auto& b : curve) {
            if (a.N == b.N && a.M < b.M && b.measure > a.measure) monotone = false;
            if (a.M == b.M && a.N < b.N && b.measure < a.measure) monotone = false;
        }
    rep.verdicts.emplace_back("monotone", monotone);
    return rep;
}

ExperimentReport lil_report(const FunctionSource& f, const LilResult& r, const LilSpec& spec, double epsilon) {
    ExperimentReport rep;
    rep.experiment = "lil";
    rep.inputs.set("function", f.label()).set("j_min", std::int64_t{spec.j_min}).set("j_max", std::int64_t{spec.j_max});
    rep.inputs.set("points", static_cast<std::int64_t>(r.points.size()));
    rep.tolerances = quad_fields(spec.quad);
    rep.tolerances.set("epsilon", epsilon);
    for (const auto& s : r.records) {
        Fields row;
        row.set("x", s.x).set("j", std::int64_t{s.j}).set("h", s.h).set("numerator", s.numerator).set("a2", s.a2);
        row.set("denominator", s.denominator).set("ratio", s.ratio).set("pre_asymptotic", s.pre_asymptotic);
        row.set("quadrature_warning", s.quadrature_warning);
        rep.records.push_back(std::move(row));
    }
    const double upper = 2.0 * lil_constant();
    std::size_t below = 0;
    std::size_t above_floor = 0;
    std::vector<double> maxima;
    for (const auto& p : r.points) {
        maxima.push_back(p.max_ratio);
        if (p.max_ratio <= upper) ++below;
        if (p.max_ratio >= 0.02) ++above_floor;
    }
    const double n = static_cast<double>(std::max<std::size_t>(r.points.size(), 1));
    rep.summary.set("lil_constant", lil_constant()).set("upper_threshold", upper);
    rep.summary.set("max_ratio_per_x", maxima);
    rep.summary.set("fraction_below_upper", static_cast<double>(below) / n);
    rep.summary.set("fraction_above_0.02", static_cast<double>(above_floor) / n);
    rep.verdicts.emplace_back("upper", static_cast<double>(below) / n >= 1.0 - epsilon);
    rep.verdicts.emplace_back("lower", static_cast<double>(above_floor) / n >= 1.0 - 2.0 * epsilon);
    return rep;
}

ExperimentReport growth_report(const FunctionSource& f, std::span<const GrowthFit> fits, const GrowthSpec& spec,
                               double epsilon) {
    ExperimentReport rep;
    rep.experiment = "zygmund";
    rep.inputs.set("function", f.label()).set("j_min", std::int64_t{spec.j_min}).set("j_max", std::int64_t{spec.j_max});
    rep.tolerances = quad_fields(spec.quad);
    rep.tolerances.set("epsilon", epsilon).set("r2_min", 0.95);
    std::size_t good = 0;
    for (const auto& g : fits) {
        Fields row;
        row.set("x", g.x).set("slope", g.slope).set("intercept", g.intercept).set("r2", g.r2);
        row.set("diverging", g.diverging).set("values", g.values);
        rep.records.push_back(std::move(row));
        if (g.slope > 0.0 && g.r2 >= 0.95) ++good;
    }
    const double frac = static_cast<double>(good) / static_cast<double>(std::max<std::size_t>(fits.size(), 1));
    rep.summary.set("fraction_good_fit", frac);
    rep.verdicts.emplace_back("growth", frac >= 1.0 - epsilon);
    return rep;
}

ExperimentReport sobolev_report(const SobolevResult& r, std::span<const double> ps, const SobolevSpec& spec) {
    ExperimentReport rep;
    rep.experiment = "sobolev";
    rep.inputs.set("p", std::vector<double>(ps.begin(), ps.end()));
    rep.tolerances = quad_fields(spec.quad);
    rep.tolerances.set("panel_nodes", std::int64_t{spec.panel_nodes}).set("panel_width", spec.panel_width);
    rep.tolerances.set("grading_levels", std::int64_t{spec.grading_levels});
    bool in_range = true;
    double worst_change = 0.0;
    for (const auto& row : r.rows) {
        Fields f;
        f.set("function", row.function).set("p", row.p).set("norm_A", row.norm_A).set("norm_df", row.norm_df);
        f.set("ratio", row.ratio).set("ratio_refined", row.ratio_refined);
        f.set("refinement_change", row.refinement_change);
        rep.records.push_back(std::move(f));
        in_range = in_range && row.ratio >= 0.02 && row.ratio <= 50.0;
        if (spec.refine) worst_change = std::max(worst_change, std::isnan(row.refinement_change) ? 1.0 : row.refinement_change);
    }
    rep.summary.set("spread", r.spread);
    rep.summary.set("max_refinement_change", worst_change);
    bool spread_ok = true;
    for (double s : r.spread) spread_ok = spread_ok && s <= 25.0;
    rep.verdicts.emplace_back("ratios_in_range", in_range);
    rep.verdicts.emplace_back("spread", spread_ok);
    if (spec.refine) rep.verdicts.emplace_back("refinement_stable", worst_change < 0.02);
    return rep;
}

ExperimentReport classify_report(const FunctionSource& f, const ClassifyResult& r, const ClassifySpec& spec) {
    ExperimentReport rep;
    rep.experiment = "classify";
    rep.inputs.set("function", f.label()).set("points", static_cast<std::int64_t>(r.labels.size()));
    rep.tolerances = quad_fields(spec.quad);
    rep.tolerances.set("j_min", std::int64_t{spec.j_min}).set("j_max", std::int64_t{spec.j_max});
    rep.tolerances.set("derivative_tol", spec.derivative_tol).set("delta2_bound", spec.delta2_bound);
    rep.tolerances.set("profile_j_min", std::int64_t{spec.profile_j_min});
    rep.tolerances.set("profile_j_max", std::int64_t{spec.profile_j_max});
    for (const auto& p : r.labels) {
        Fields row;
        row.set("x", p.x).set("oscillation", p.oscillation).set("delta2_sup", p.delta2_sup);
        row.set("diverging", p.diverging).set("a_label", p.a_label).set("b_label", p.b_label);
        rep.records.push_back(std::move(row));
    }
    rep.summary.set("agreement", r.agreement).set("both_false", r.both_false);
    rep.verdicts.emplace_back("agreement_0.98", r.agreement >= 0.98);
    return rep;
}

}  // namespace sqlab
