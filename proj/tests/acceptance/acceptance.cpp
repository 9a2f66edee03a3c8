// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sqlab/cli.hpp"
#include "sqlab/experiments.hpp"
#include "sqlab/martingale.hpp"
#include "sqlab/parallel.hpp"
#include "sqlab/sqfn.hpp"

using namespace sqlab;

namespace {

constexpr std::uint64_t kSeed = 20261019;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fraction(std::size_t k, std::size_t n) { return std::to_string(k) + "/" + std::to_string(n); }

// ---------------------------------------------------------------- 1

Outcome closed_forms() {
    const FunctionSource sq = builtin::square();
    double worst_conical = 0.0;
    for (double x : {-1.5, 0.0, 0.37, 2.0}) worst_conical = std::max(worst_conical, std::abs(conical_A2(sq, x, 0.5) - 0.75));
    double worst_mean = 0.0;
    for (int j : {3, 6})
        worst_mean = std::max(worst_mean, std::abs(mean_divided_diff(sq, 1.0, std::ldexp(1.0, -j)) - 2.0 * std::numbers::ln2));
    const double discrete_oracle = 2.0 / 7.0 * (1.0 - std::pow(8.0, -5.0));
    double worst_discrete = 0.0;
    for (double x : {-0.3, 0.0, 1.1}) worst_discrete = std::max(worst_discrete, std::abs(discrete_A2(sq, x, 5) - discrete_oracle));
    const double tilde_err = std::abs(tilde_A2(sq, 0.0, 0.5) - 0.375);
    Outcome o;
    o.pass = worst_conical <= 1e-6 && worst_mean <= 1e-6 && worst_discrete <= 1e-9 && tilde_err <= 1e-6;
    o.detail = "conical err " + fmt("%.2e", worst_conical) + ", mean dd err " + fmt("%.2e", worst_mean) +
               ", discrete err " + fmt("%.2e", worst_discrete) + ", tilde err " + fmt("%.2e", tilde_err);
    return o;
}

// ---------------------------------------------------------------- 2

Outcome identities() {
    struct Case {
        FunctionSource f;
        double limit;
        IdentitySpec spec;
        double lo;
        double hi;
    };
    IdentitySpec rough;
    rough.lhs = QuadratureSpec{8, 1e-4, 8, 1e-15, 48};
    rough.tolerance = 1e-4;
    rough.max_refinements = 5;
    const std::vector<Case> cases{
        {builtin::affine(2.0, 0.5), 1e-4, IdentitySpec{}, -2.0, 2.0},
        {builtin::square(), 1e-4, IdentitySpec{}, -2.0, 2.0},
        {builtin::gauss_sine(3.0), 1e-4, IdentitySpec{}, -2.0, 2.0},
        {weierstrass_hardy(2.0), 1e-3, rough, 0.0, 1.0},
    };
    Outcome o;
    o.pass = true;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const Case& k = cases[c];
        const auto xs = random_samples(k.lo, k.hi, 10, kSeed + c);
        const auto ys = random_samples(0.05, 0.95, 10, kSeed + 100 + c);
        const auto errs = parallel_map<std::pair<double, double>>(10, 0, [&](std::size_t i) {
            return std::make_pair(check_identity_a(k.f, xs[i], ys[i], k.spec).rel_error,
                                  check_identity_b(k.f, xs[i], ys[i], k.spec).rel_error);
        });
        double wa = 0.0;
        double wb = 0.0;
        for (const auto& [a, b] : errs) {
            wa = std::max(wa, a);
            wb = std::max(wb, b);
        }
        o.pass = o.pass && wa < k.limit && wb < k.limit;
        o.detail += (c ? "; " : "") + k.f.label() + " a " + fmt("%.1e", wa) + " b " + fmt("%.1e", wb);
    }
    return o;
}

// ---------------------------------------------------------------- 3

Outcome inequality_suite() {
    const double lambdas[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    const double alphas[] = {0.3, 0.6, 0.9};
    struct Tally {
        int violations = 0;
        double orthogonality = 0.0;
        double defect = 0.0;
    };
    const std::size_t n = 2000;
    const auto tallies = parallel_map<Tally>(n, 0, [&](std::size_t i) {
        const int depth = 8 + static_cast<int>(i % 7);
        const IncrementLaw law{i % 2 ? IncrementKind::Uniform : IncrementKind::PlusMinus, 0.2 + 0.3 * static_cast<double>(i % 5)};
        const DyadicGrid grid(1.0 + 0.75 * static_cast<double>(i % 4));
        const MartingaleTrace s = random_martingale(derive_seed(kSeed, i), depth, law, grid);
        const double I0 = grid.length(0);
        const double slack = kContractSlack * I0;
        Tally t;
        if (lemma21_integral(s, depth) > I0 + slack) ++t.violations;
        for (double l : lambdas)
            if (lemma22_tail_measure(s, depth, l) > std::exp(-l) * I0 + slack) ++t.violations;
        for (double a : alphas)
            if (lemma23_exp_moment(s, depth, a) > I0 / (1.0 - a) + slack) ++t.violations;
        double lhs = 0.0;
        for (double v : s.generation(depth)) lhs += v * v;
        lhs *= grid.length(depth);
        const double rhs = quadratic_variation(s, depth).integral();
        t.orthogonality = std::abs(lhs - rhs) / std::max(1.0, rhs);
        t.defect = s.martingale_defect();
        return t;
    });
    int violations = 0;
    double orth = 0.0;
    double defect = 0.0;
    for (const auto& t : tallies) {
        violations += t.violations;
        orth = std::max(orth, t.orthogonality);
        defect = std::max(defect, t.defect);
    }
    Outcome o;
    o.pass = violations == 0 && orth <= 1e-12;
    o.detail = std::to_string(n) + " traces, " + std::to_string(violations) + " violations, orthogonality err " +
               fmt("%.1e", orth) + ", martingale defect " + fmt("%.1e", defect);
    return o;
}

// ---------------------------------------------------------------- 4

Outcome stopped_variation() {
    const double cs[] = {0.3, 0.7, 1.5};
    const std::size_t n = 500;
    struct Row {
        double ratio = 0.0;
        bool monotone = true;
    };
    const auto rows = parallel_map<Row>(n, 0, [&](std::size_t i) {
        const int depth = 8 + static_cast<int>(i % 7);
        const double rho = 1.0 + 0.5 * static_cast<double>(i % 6);
        const MartingaleTrace s = random_martingale(derive_seed(kSeed + 4, i), depth,
                                                    IncrementLaw{IncrementKind::PlusMinus, cs[i % 3]}, DyadicGrid(rho));
        const StoppedVariation v = lemma24_stopped_qv(s, 1.0);
        Row r;
        r.ratio = v.value() / (100.0 * rho);
        for (std::size_t k = 1; k < v.by_depth.size(); ++k) r.monotone = r.monotone && v.by_depth[k] >= v.by_depth[k - 1];
        return r;
    });
    int violations = 0;
    int non_monotone = 0;
    double worst = 0.0;
    for (const auto& r : rows) {
        if (r.ratio > 1.0 + kContractSlack) ++violations;
        if (!r.monotone) ++non_monotone;
        worst = std::max(worst, r.ratio);
    }
    Outcome o;
    o.pass = violations == 0 && non_monotone == 0;
    o.detail = std::to_string(n) + " traces, " + std::to_string(violations) + " above 100 rho, " +
               std::to_string(non_monotone) + " non-monotone, max value/(100 rho) " + fmt("%.3g", worst);
    return o;
}

// ---------------------------------------------------------------- 5

Outcome zygmund() {
    GrowthSpec spec;
    spec.quad = QuadratureSpec{8, 1e-4, 5, 1e-9, 48};
    spec.j_min = 4;
    spec.j_max = 18;
    const auto xs = random_samples(0.0, 1.0, 100, kSeed + 5);
    const auto fits = zygmund_growth(weierstrass_hardy(2.0), xs, spec);
    std::size_t good = 0;
    std::string misses;
    int shown = 0;
    for (const auto& g : fits) {
        if (g.slope > 0.0 && g.r2 >= 0.95) {
            ++good;
        } else if (shown++ < 12) {
            misses += " x=" + fmt("%.4f", g.x) + " R2=" + fmt("%.3f", g.r2);
        }
    }
    Outcome o;
    o.pass = good >= 95;
    o.detail = "R2 >= 0.95 and slope > 0 at " + fraction(good, fits.size()) + " (need 95)";
    if (!misses.empty()) o.detail += "; misses:" + misses;
    return o;
}

// ---------------------------------------------------------------- 6

Outcome lil() {
    LilSpec spec;
    spec.quad = QuadratureSpec{8, 1e-4, 5, 1e-6, 48};
    spec.j_min = 6;
    spec.j_max = 18;
    const auto xs = random_samples(0.0, 1.0, 200, kSeed + 6);
    const LilResult r = lil_profile(weierstrass_hardy(2.0), xs, spec);
    const double upper = 2.0 * lil_constant();
    std::size_t below = 0;
    std::size_t above = 0;
    std::size_t warned = 0;
    std::string misses;
    int shown = 0;
    for (const auto& p : r.points) {
        if (p.max_ratio <= 2.36) {
            ++below;
        } else if (shown++ < 12) {
            misses += " x=" + fmt("%.4f", p.x) + " max=" + fmt("%.3f", p.max_ratio);
        }
        if (p.max_ratio >= 0.02) ++above;
    }
    for (const auto& s : r.records) warned += s.quadrature_warning ? 1 : 0;
    Outcome o;
    o.pass = below >= 190 && above >= 180;
    o.detail = "max ratio <= 2.36 (2 sqrt(2 ln 2) = " + fmt("%.4f", upper) + ") at " + fraction(below, 200) +
               " (need 190), >= 0.02 at " + fraction(above, 200) + " (need 180), records with quadrature warning " +
               fraction(warned, r.records.size());
    if (!misses.empty()) o.detail += "; misses:" + misses;
    return o;
}

// ---------------------------------------------------------------- 7

Outcome sobolev() {
    const std::vector<FunctionSource> family{builtin::hat(), builtin::gauss_sine(1.0), builtin::gauss_sine(3.0),
                                             builtin::gauss_sine(9.0)};
    const std::vector<double> ps{1.5, 2.0, 3.0};
    SobolevSpec spec;
    const SobolevResult r = sobolev_compare(family, ps, spec);
    double lo = INFINITY;
    double hi = 0.0;
    double change = 0.0;
    for (const auto& row : r.rows) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
        change = std::max(change, std::isnan(row.refinement_change) ? INFINITY : row.refinement_change);
    }
    double spread = 0.0;
    for (double s : r.spread) spread = std::max(spread, std::isnan(s) ? INFINITY : s);
    Outcome o;
    o.pass = lo >= 0.02 && hi <= 50.0 && spread <= 25.0 && change < 0.02;
    o.detail = "ratios in [" + fmt("%.4g", lo) + ", " + fmt("%.4g", hi) + "], max spread " + fmt("%.3g", spread) +
               ", max refinement change " + fmt("%.2e", change);
    return o;
}

// ---------------------------------------------------------------- 8

Outcome classifier() {
    ClassifySpec spec;
    const auto grid = uniform_samples(-2.0, 2.0, 100);
    std::vector<double> away;
    for (double x : grid)
        if (std::abs(x) >= 0.25) away.push_back(x);
    Outcome o;
    o.pass = true;
    const std::vector<std::pair<FunctionSource, std::vector<double>>> smooth{
        {builtin::square(), grid}, {builtin::abs(), away}, {builtin::gauss_sine(3.0), grid}};
    for (const auto& [f, xs] : smooth) {
        const ClassifyResult r = classify_differentiability(f, xs, spec);
        o.pass = o.pass && r.agreement >= 0.98;
        o.detail += f.label() + " agree " + fmt("%.3f", r.agreement) + "; ";
    }
    const ClassifyResult w = classify_differentiability(weierstrass_hardy(2.0), uniform_samples(0.0, 1.0, 100), spec);
    std::size_t flag_missed = 0;
    for (const auto& p : w.labels) flag_missed += (!p.a_label && p.b_label) ? 1 : 0;
    o.pass = o.pass && w.both_false >= 0.95;
    o.detail += "f_2 both false " + fmt("%.3f", w.both_false) + " (need 0.95), B true only through an unfired divergence flag at " +
                fraction(flag_missed, w.labels.size());
    return o;
}

// ---------------------------------------------------------------- 9

Outcome directional() {
    const Function2D r2 = builtin2::radial_square();
    double sphere_err = 0.0;
    for (int M : {8, 16})
        for (Vec2 p : {Vec2{0.3, -0.2}, Vec2{0.0, 0.0}, Vec2{1.0, 2.0}})
            sphere_err = std::max(sphere_err, std::abs(sphere_A2(r2, p, 0.0, M) - 1.0));
    double dir_err = 0.0;
    const Function2D x2 = builtin2::x_squared();
    for (double h : {0.0, 0.25, 0.5}) dir_err = std::max(dir_err, std::abs(directional_A2(x2, {0.4, -1.0}, {1.0, 0.0}, h) - (1.0 - h * h)));
    const Function2D g = builtin2::gauss_sine(3.0);
    const FunctionSource g1 = builtin::gauss_sine(3.0);
    for (double x : {-0.5, 0.2}) dir_err = std::max(dir_err, std::abs(directional_A2(g, {x, 0.0}, {1.0, 0.0}, 0.1) - conical_A2(g1, x, 0.1)));
    const AngleInterval full{0.0, 2.0 * std::numbers::pi};
    double sector = 0.0;
    for (Vec2 p : {Vec2{0.1, 0.2}, Vec2{-1.0, 0.5}})
        sector = std::max(sector, std::abs(mean_dd_sector(builtin2::affine(1.3, -0.4, 2.0), p, 0.25, std::vector<AngleInterval>{full})));
    Outcome o;
    o.pass = sphere_err <= 1e-3 && dir_err <= 1e-6 && sector <= 1e-8;
    o.detail = "sphere err " + fmt("%.2e", sphere_err) + ", directional err " + fmt("%.2e", dir_err) +
               ", full-circle affine sector " + fmt("%.2e", sector);
    return o;
}

// ---------------------------------------------------------------- 10

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility() {
    const auto root = std::filesystem::temp_directory_path() / "sqlab-acceptance-repro";
    const std::vector<std::vector<std::string>> runs{
        {"martingale", "lemma22", "--law", "uniform:1", "--depth", "12", "--trials", "200", "--seed", "99"},
        {"martingale", "lemma24", "--law", "pm:0.7", "--depth", "10", "--trials", "100", "--seed", "5"},
        {"identity", "--which", "b", "--f", "gauss-sine:3", "--x", "0.2,-0.4", "--y", "0.25"},
        {"lil", "--f", "weierstrass:2", "--sampling", "random", "--samples", "6", "--seed", "3", "--j-min", "6",
         "--j-max", "11"},
        {"classify", "--f", "gauss-sine:3", "--samples", "8", "--lo", "-1", "--hi", "1"},
        {"goodlambda", "--f", "gauss-sine:3", "--samples", "8", "--h", "0.125"},
        {"sobolev", "--family", "hat", "--p", "2", "--no-refine"},
    };
    std::size_t same = 0;
    std::string bad;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::string text[2];
        for (int rep = 0; rep < 2; ++rep) {
            const auto dir = root / (std::to_string(i) + "-" + std::to_string(rep));
            std::filesystem::remove_all(dir);
            auto args = runs[i];
            args.push_back("--out");
            args.push_back((root / std::to_string(i)).string());
            std::ostringstream out;
            std::ostringstream err;
            if (sqlab::cli::run(args, out, err) != 0) {
                bad += " " + runs[i][0] + "(exit)";
                break;
            }
            for (const auto& e : std::filesystem::directory_iterator(root / std::to_string(i)))
                if (e.path().extension() == ".json") text[rep] = slurp(e.path());
            std::filesystem::remove_all(root / std::to_string(i));
        }
        if (!text[0].empty() && text[0] == text[1]) ++same;
        else bad += " " + runs[i][0];
    }
    Outcome o;
    o.pass = same == runs.size();
    o.detail = "byte-identical JSON on rerun for " + fraction(same, runs.size()) + " invocations" +
               (bad.empty() ? "" : "; differing:" + bad);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "closed-form oracles", 5, closed_forms},
        {2, "averaging identities", 120, identities},
        {3, "martingale inequality suite", 60, inequality_suite},
        {4, "stopped quadratic variation", 60, stopped_variation},
        {5, "Zygmund growth", 300, zygmund},
        {6, "LIL ratio", 600, lil},
        {7, "Sobolev comparison", 600, sobolev},
        {8, "classifier agreement", 300, classifier},
        {9, "directional and sphere consistency", 60, directional},
        {10, "reproducibility", 0, reproducibility},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    std::printf("seed %llu, threads %u\n", static_cast<unsigned long long>(kSeed), resolve_threads(0));
    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.limit_s <= 0 || secs < c.limit_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::string timing = fmt("%.1f s", secs);
        if (c.limit_s > 0) timing += fmt(" of %.0f s", c.limit_s);
        if (!in_time) timing += ", over the time limit";
        std::printf("%s criterion %d %s (%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name, timing.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
