#include "sqlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <type_traits>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqlab/differences.hpp"
#include "sqlab/errors.hpp"
#include "sqlab/experiments.hpp"
#include "sqlab/format.hpp"
#include "sqlab/kernel.hpp"
#include "sqlab/martingale.hpp"
#include "sqlab/parallel.hpp"
#include "sqlab/sqfn.hpp"

namespace sqlab::cli {

namespace {

using ojson = nlohmann::ordered_json;

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"eval", "evaluate f at each --x"},
    {"delta", "first (or --second) symmetric difference at --x, --t"},
    {"sqfn", "square functions and mean divided differences (--op)"},
    {"profile", "A^2(x, 2^-j) over a j-range with growth fits"},
    {"martingale", "random martingale validators (--op lemma21..lemma24|trace|build)"},
    {"identity", "averaging identity a or b at (x, y)"},
    {"goodlambda", "measure of {sup gap > M, tilde A^2 <= N}"},
    {"lil", "iterated-logarithm ratio profile"},
    {"sobolev", "||A(f)||_p against ||f'||_p"},
    {"classify", "differentiability labels from differences and square functions"},
};

// Negative numbers in the quadrature, j-range and h fields mean "use the
// default of the chosen command"; resolve() replaces them before anything
// runs, so reports always carry concrete values.
struct RunConfig {
    std::string command;
    std::string op;
    std::string f = "square";
    std::string csv;
    std::vector<double> x;
    std::vector<double> y{0.5};
    double t = 0.5;
    double h = -1.0;
    double delta = 1.0;
    int levels = 5;
    std::string kernel = "unit";
    bool second = false;
    std::string which = "a";

    int j_min = -1;
    int j_max = -1;
    int diff_j_min = 8;
    int diff_j_max = 16;
    int samples = 100;
    std::string sampling = "grid";
    double lo = 0.0;
    double hi = 1.0;
    double exclude = 0.0;

    std::vector<double> M{2.0, 3.0, 4.0, 6.0, 8.0};
    std::vector<double> N{0.5, 1.0, 2.0};
    std::vector<double> p{1.5, 2.0, 3.0};
    std::vector<std::string> family{"hat", "gauss-sine:1", "gauss-sine:3", "gauss-sine:9"};

    std::string law = "pm:1";
    int depth = 10;
    int trials = 100;
    double rho = 1.0;
    double shift = 0.0;
    std::vector<double> lambda{0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> alpha{0.3, 0.6, 0.9};
    double bound = 1.0;

    int nodes = -1;
    double tolerance = -1.0;
    int max_levels = -1;
    double absolute_floor = -1.0;
    int max_bands = -1;

    int rho_nodes = 16;
    int s_nodes = 16;
    double rhs_tolerance = 1e-8;
    int max_refinements = 4;
    int y_per_octave = 4;
    int panel_nodes = 8;
    double panel_width = 0.25;
    int grading_levels = 16;
    bool refine = true;
    double derivative_tol = 1e-3;
    double delta2_bound = 1e3;
    double epsilon = 0.05;

    std::uint64_t seed = 20240601;
    int threads = 0;
    std::string out;
};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

// Every configurable field is both a flag (--j-min) and a JSON key (j_min).
class Registry {
public:
    explicit Registry(CLI::App& app) : app_(app) {}

    template <class T>
    void add(const std::string& key, T& field, const std::string& help) {
        entries_.push_back({key, [&field](const ojson& j) { field = j.get<T>(); },
                            [&field]() { return ojson(field); }});
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if constexpr (std::is_same_v<T, bool>) {
            app_.add_flag("--" + flag + ",!--no-" + flag, field, help);
        } else {
            CLI::Option* opt = app_.add_option("--" + flag, field, help);
            if constexpr (is_vector<T>::value) {
                opt->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
                if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
            }
        }
    }

    void load(const ojson& j) const {
        if (!j.is_object()) throw BadParameter("config file must hold a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto e = std::find_if(entries_.begin(), entries_.end(),
                                        [&](const Entry& x) { return x.key == it.key(); });
            if (e == entries_.end()) throw BadParameter("unknown config key '" + it.key() + "'");
            try {
                e->load(it.value());
            } catch (const ojson::exception& ex) {
                throw BadParameter("config key '" + it.key() + "': " + ex.what());
            }
        }
    }

    ojson dump() const {
        ojson j = ojson::object();
        for (const auto& e : entries_) j[e.key] = e.store();
        return j;
    }

private:
    struct Entry {
        std::string key;
        std::function<void(const ojson&)> load;
        std::function<ojson()> store;
    };
    CLI::App& app_;
    std::vector<Entry> entries_;
};

void register_all(Registry& r, RunConfig& c) {
    r.add("op", c.op, "sqfn: conical|g2|mean|star|tilde|discrete|kernel|averaged");
    r.add("f", c.f, "builtin function id[:params], e.g. square, affine:2,0, weierstrass:2");
    r.add("csv", c.csv, "two-column x,f(x) CSV with uniform spacing (overrides --f)");
    r.add("x", c.x, "evaluation points (repeat or comma-separate)");
    r.add("y", c.y, "identity heights, 0 < y < 2 (a) or 0 < y < 1 (b)");
    r.add("t", c.t, "difference step for delta");
    r.add("h", c.h, "truncation height (sqfn default 0.5, goodlambda 1/64)");
    r.add("delta", c.delta, "vertical window for g2");
    r.add("levels", c.levels, "dyadic levels for discrete");
    r.add("kernel", c.kernel, "weight for sqfn kernel: unit|box|printed");
    r.add("second", c.second, "delta: second difference");
    r.add("which", c.which, "identity: a|b");
    r.add("j_min", c.j_min, "first profile level");
    r.add("j_max", c.j_max, "last profile level");
    r.add("diff_j_min", c.diff_j_min, "classify: first difference level");
    r.add("diff_j_max", c.diff_j_max, "classify: last difference level");
    r.add("samples", c.samples, "number of sample points");
    r.add("sampling", c.sampling, "grid (cell midpoints) or random (seeded)");
    r.add("lo", c.lo, "sample interval start");
    r.add("hi", c.hi, "sample interval end");
    r.add("exclude", c.exclude, "drop samples with |x| < exclude");
    r.add("M", c.M, "goodlambda M values");
    r.add("N", c.N, "goodlambda N values");
    r.add("p", c.p, "sobolev exponents");
    r.add("family", c.family, "sobolev functions (repeat)");
    r.add("law", c.law, "increment law pm:c or uniform:c");
    r.add("depth", c.depth, "martingale depth");
    r.add("trials", c.trials, "random martingales");
    r.add("rho", c.rho, "grid scale in [1, 4)");
    r.add("shift", c.shift, "grid shift");
    r.add("lambda", c.lambda, "lemma22 thresholds");
    r.add("alpha", c.alpha, "lemma23 exponents in (0, 1)");
    r.add("bound", c.bound, "lemma24 bound on sup |S_k|");
    r.add("nodes", c.nodes, "quadrature nodes per axis");
    r.add("tolerance", c.tolerance, "quadrature relative tolerance");
    r.add("max_levels", c.max_levels, "quadrature doublings");
    r.add("absolute_floor", c.absolute_floor, "quadrature absolute slack");
    r.add("max_bands", c.max_bands, "dyadic bands for h = 0");
    r.add("rho_nodes", c.rho_nodes, "identity: Gauss nodes in rho");
    r.add("s_nodes", c.s_nodes, "identity: Gauss nodes in s");
    r.add("rhs_tolerance", c.rhs_tolerance, "identity: martingale side tolerance");
    r.add("max_refinements", c.max_refinements, "identity: node doublings");
    r.add("y_per_octave", c.y_per_octave, "goodlambda: y-grid density");
    r.add("panel_nodes", c.panel_nodes, "sobolev: Gauss nodes per panel");
    r.add("panel_width", c.panel_width, "sobolev: widest panel");
    r.add("grading_levels", c.grading_levels, "sobolev: panels toward breakpoints");
    r.add("refine", c.refine, "sobolev: rerun at doubled resolution");
    r.add("derivative_tol", c.derivative_tol, "classify: oscillation bound");
    r.add("delta2_bound", c.delta2_bound, "classify: bound on sup |Delta_2|");
    r.add("epsilon", c.epsilon, "allowed failure fraction in verdicts");
    r.add("seed", c.seed, "master seed");
    r.add("threads", c.threads, "worker threads, 0 = all cores");
    r.add("out", c.out, "output directory (default $SQLAB_OUT_DIR)");
}

QuadratureSpec default_quad(const std::string& cmd) {
    if (cmd == "identity") return IdentitySpec{}.lhs;
    if (cmd == "lil") return {8, 1e-4, 5, 1e-6, 48};
    if (cmd == "profile") return {8, 1e-4, 5, 1e-9, 48};
    if (cmd == "classify") return ClassifySpec{}.quad;
    if (cmd == "sobolev") return SobolevSpec{}.quad;
    return {};
}

void resolve(RunConfig& c) {
    const QuadratureSpec d = default_quad(c.command);
    if (c.nodes < 0) c.nodes = d.nodes;
    if (c.tolerance < 0) c.tolerance = d.tolerance;
    if (c.max_levels < 0) c.max_levels = d.max_levels;
    if (c.absolute_floor < 0) c.absolute_floor = d.absolute_floor;
    if (c.max_bands < 0) c.max_bands = d.max_bands;
    const bool lil = c.command == "lil";
    const bool classify = c.command == "classify";
    if (c.j_min < 0) c.j_min = lil ? 6 : 4;
    if (c.j_max < 0) c.j_max = classify ? 16 : 18;
    if (c.h < 0) c.h = c.command == "goodlambda" ? 1.0 / 64.0 : 0.5;
    if (c.command == "sqfn" && c.op.empty()) c.op = "conical";
    if (c.out.empty())
        if (const char* env = std::getenv("SQLAB_OUT_DIR")) c.out = env;

    QuadratureSpec{c.nodes, c.tolerance, c.max_levels, c.absolute_floor, c.max_bands}.validate();
    if (c.sampling != "grid" && c.sampling != "random") throw BadParameter("sampling must be grid or random");
    if (c.samples < 1) throw BadParameter("samples must be >= 1");
    if (c.j_min < 0 || c.j_max < c.j_min) throw BadParameter("need 0 <= j_min <= j_max");
    if (c.trials < 1) throw BadParameter("trials must be >= 1");
    if (c.threads < 0) throw BadParameter("threads must be >= 0");
    if (c.epsilon < 0 || c.epsilon >= 1) throw BadParameter("epsilon must lie in [0, 1)");
}

QuadratureSpec quad(const RunConfig& c) {
    return {c.nodes, c.tolerance, c.max_levels, c.absolute_floor, c.max_bands};
}

FunctionSource load_function(const RunConfig& c) {
    return c.csv.empty() ? parse_function(c.f) : load_grid_csv(c.csv);
}

std::vector<double> point_list(const RunConfig& c) {
    if (c.x.empty()) throw BadParameter("--x is required for " + c.command);
    return c.x;
}

std::vector<double> sample_points(const RunConfig& c) {
    if (!c.x.empty()) return c.x;
    std::vector<double> xs = c.sampling == "grid" ? uniform_samples(c.lo, c.hi, c.samples)
                                                  : random_samples(c.lo, c.hi, c.samples, c.seed);
    if (c.exclude > 0)
        xs.erase(std::remove_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x) < c.exclude; }),
                 xs.end());
    if (xs.empty()) throw BadParameter("no sample points left after --exclude");
    return xs;
}

void print_summary(const ExperimentReport& rep, std::ostream& out) {
    for (const auto& [k, v] : rep.summary.items()) {
        if (const auto* d = std::get_if<double>(&v)) out << k << ' ' << fmt_num(*d) << '\n';
        else if (const auto* i = std::get_if<std::int64_t>(&v)) out << k << ' ' << *i << '\n';
        else if (const auto* b = std::get_if<bool>(&v)) out << k << ' ' << (*b ? "true" : "false") << '\n';
        else if (const auto* s = std::get_if<std::string>(&v)) out << k << ' ' << *s << '\n';
    }
    for (const auto& [k, ok] : rep.verdicts) out << "verdict " << k << ' ' << (ok ? "pass" : "fail") << '\n';
}

ExperimentReport point_report(const std::string& name, const FunctionSource& f) {
    ExperimentReport rep;
    rep.experiment = name;
    rep.inputs.set("function", f.label());
    return rep;
}

// ------------------------------------------------------------- commands

ExperimentReport cmd_eval(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    ExperimentReport rep = point_report("eval", f);
    for (double x : point_list(c)) {
        const double v = f.evaluate(x);
        out << fmt_num(v) << '\n';
        rep.records.push_back(Fields().set("x", x).set("value", v));
    }
    return rep;
}

ExperimentReport cmd_delta(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    ExperimentReport rep = point_report(c.second ? "delta2" : "delta", f);
    rep.inputs.set("t", c.t);
    for (double x : point_list(c)) {
        const double v = c.second ? delta2(f, x, c.t) : delta(f, x, c.t);
        out << fmt_num(v) << '\n';
        rep.records.push_back(Fields().set("x", x).set("value", v));
    }
    return rep;
}

ExperimentReport cmd_sqfn(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    const QuadratureSpec q = quad(c);
    std::function<double(double)> op;
    if (c.op == "conical") op = [&](double x) { return conical_A2(f, x, c.h, q); };
    else if (c.op == "g2") op = [&](double x) { return vertical_g2(f, x, c.delta, q); };
    else if (c.op == "mean") op = [&](double x) { return mean_divided_diff(f, x, c.h, q); };
    else if (c.op == "star") op = [&](double x) { return mean_dd_star(f, x, c.h, q); };
    else if (c.op == "tilde") op = [&](double x) { return tilde_A2(f, x, c.y.at(0), q); };
    else if (c.op == "averaged") op = [&](double x) { return averaged_difference(f, x, c.y.at(0), q); };
    else if (c.op == "discrete") op = [&](double x) { return discrete_A2(f, x, c.levels, q); };
    else if (c.op == "kernel") {
        const PiecewiseKernel K = kernel_by_name(c.kernel);
        op = [&f, K, &c, q](double x) { return kernel_mean_dd(f, x, c.h, K, q); };
    } else {
        throw BadParameter("unknown sqfn op '" + c.op + "'");
    }
    ExperimentReport rep = point_report("sqfn-" + c.op, f);
    rep.inputs.set("h", c.h).set("y", c.y.at(0)).set("delta", c.delta).set("levels", std::int64_t{c.levels});
    for (double x : point_list(c)) {
        const double v = op(x);
        out << fmt_num(v) << '\n';
        rep.records.push_back(Fields().set("x", x).set("value", v));
    }
    return rep;
}

ExperimentReport cmd_profile(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    GrowthSpec spec{quad(c), c.j_min, c.j_max, c.threads};
    const std::vector<double> xs = sample_points(c);
    const auto fits = zygmund_growth(f, xs, spec);
    for (const auto& g : fits) out << fmt_num(g.x) << ' ' << fmt_num(g.slope) << ' ' << fmt_num(g.r2) << '\n';
    ExperimentReport rep = growth_report(f, fits, spec, c.epsilon);
    return rep;
}

bool within(double value, double bound) { return value <= bound + kContractSlack * std::abs(bound); }

ExperimentReport cmd_martingale(const RunConfig& c, std::ostream& out) {
    ExperimentReport rep;
    rep.experiment = "martingale-" + c.op;
    const IncrementLaw law = IncrementLaw::parse(c.law);
    const DyadicGrid grid(c.rho, c.shift);
    const double I0 = grid.length(0);
    if (c.depth < 0 || c.depth > DyadicGrid::kMaxDepth) throw BadParameter("depth must lie in [0, 22]");
    rep.inputs.set("law", law.describe()).set("depth", std::int64_t{c.depth}).set("trials", std::int64_t{c.trials});
    rep.inputs.set("rho", c.rho).set("seed", std::to_string(c.seed));
    rep.tolerances.set("contract_slack", kContractSlack);
    auto trace = [&](std::size_t i) { return random_martingale(derive_seed(c.seed, i), c.depth, law, grid); };
    const auto n = static_cast<std::size_t>(c.trials);

    if (c.op == "lemma21") {
        const auto vals = parallel_map<double>(n, c.threads, [&](std::size_t i) { return lemma21_integral(trace(i), c.depth); });
        for (std::size_t i = 0; i < n; ++i)
            rep.records.push_back(Fields().set("trial", static_cast<std::int64_t>(i)).set("value", vals[i]));
        const double worst = *std::max_element(vals.begin(), vals.end());
        out << fmt_num(worst) << '\n';
        rep.summary.set("max_value", worst).set("bound", I0);
        rep.verdicts.emplace_back("integral_le_I0", within(worst, I0));
    } else if (c.op == "lemma22" || c.op == "lemma23") {
        const bool tail = c.op == "lemma22";
        const std::vector<double>& params = tail ? c.lambda : c.alpha;
        const auto vals = parallel_map<std::vector<double>>(n, c.threads, [&](std::size_t i) {
            const MartingaleTrace s = trace(i);
            std::vector<double> v;
            for (double a : params)
                v.push_back(tail ? lemma22_tail_measure(s, c.depth, a) : lemma23_exp_moment(s, c.depth, a));
            return v;
        });
        bool ok = true;
        std::vector<double> maxima;
        for (std::size_t k = 0; k < params.size(); ++k) {
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                worst = std::max(worst, vals[i][k]);
                rep.records.push_back(Fields()
                                          .set("trial", static_cast<std::int64_t>(i))
                                          .set(tail ? "lambda" : "alpha", params[k])
                                          .set("value", vals[i][k]));
            }
            const double bound = tail ? std::exp(-params[k]) * I0 : I0 / (1.0 - params[k]);
            ok = ok && within(worst, bound);
            maxima.push_back(worst);
            out << fmt_num(worst) << '\n';
        }
        rep.summary.set("max_value", maxima);
        rep.verdicts.emplace_back(tail ? "tail_le_exp_minus_lambda" : "moment_le_inverse_1_minus_alpha", ok);
    } else if (c.op == "lemma24") {
        const auto vals = parallel_map<StoppedVariation>(
            n, c.threads, [&](std::size_t i) { return lemma24_stopped_qv(trace(i), c.bound); });
        double worst = 0.0;
        bool monotone = true;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = vals[i];
            for (std::size_t k = 1; k < v.by_depth.size(); ++k) monotone = monotone && v.by_depth[k] >= v.by_depth[k - 1];
            worst = std::max(worst, v.value());
            rep.records.push_back(Fields()
                                      .set("trial", static_cast<std::int64_t>(i))
                                      .set("set_measure", v.set_measure)
                                      .set("value", v.value())
                                      .set("by_depth", v.by_depth));
        }
        out << fmt_num(worst) << '\n';
        rep.summary.set("max_value", worst).set("bound", 100.0 * c.rho);
        rep.verdicts.emplace_back("stopped_qv_le_100_rho", within(worst, 100.0 * c.rho));
        rep.verdicts.emplace_back("monotone_in_depth", monotone);
    } else if (c.op == "trace" || c.op == "build") {
        const MartingaleTrace s = c.op == "trace"
                                      ? trace(0)
                                      : build_from_function(load_function(c),
                                                            DyadicGrid::containing(c.rho, c.shift, c.x.empty() ? 0.0 : c.x[0]),
                                                            c.depth);
        s.write_csv(out);
        for (int k = 0; k <= s.depth(); ++k) {
            const auto g = s.generation(k);
            for (std::size_t i = 0; i < g.size(); ++i)
                rep.records.push_back(Fields()
                                          .set("generation", std::int64_t{k})
                                          .set("index", static_cast<std::int64_t>(i))
                                          .set("value", g[i]));
        }
        rep.summary.set("martingale_defect", s.martingale_defect());
    } else {
        throw BadParameter("martingale op must be lemma21|lemma22|lemma23|lemma24|trace|build");
    }
    return rep;
}

ExperimentReport cmd_identity(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    if (c.which != "a" && c.which != "b") throw BadParameter("--which must be a or b");
    IdentitySpec spec;
    spec.lhs = quad(c);
    spec.rho_nodes = c.rho_nodes;
    spec.s_nodes = c.s_nodes;
    spec.tolerance = c.rhs_tolerance;
    spec.max_refinements = c.max_refinements;
    spec.validate();
    std::vector<double> xs = point_list(c);
    std::vector<double> ys = c.y;
    if (ys.size() == 1) ys.assign(xs.size(), c.y[0]);
    if (xs.size() == 1 && ys.size() > 1) xs.assign(ys.size(), xs[0]);
    if (xs.size() != ys.size()) throw BadParameter("--x and --y lists must have equal length");
    const auto results = parallel_map<IdentityResult>(xs.size(), c.threads, [&](std::size_t i) {
        return c.which == "a" ? check_identity_a(f, xs[i], ys[i], spec) : check_identity_b(f, xs[i], ys[i], spec);
    });
    for (const auto& r : results)
        out << fmt_num(r.lhs) << ' ' << fmt_num(r.rhs) << ' ' << fmt_num(r.rel_error) << '\n';
    return identity_report(c.which, f, xs, ys, results, spec);
}

ExperimentReport cmd_goodlambda(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    GoodLambdaSpec spec{quad(c), c.samples, c.y_per_octave, c.threads};
    const Interval I{c.lo, c.hi};
    const auto points = good_lambda_points(f, I, c.h, spec);
    std::vector<GoodLambdaResult> curve;
    for (double M : c.M)
        for (double N : c.N)
            if (M * M > 4.0 * N) curve.push_back(good_lambda_measure(points, I, M, N));
    if (curve.empty()) throw BadParameter("no (M, N) pair with M^2 > 4N");
    for (const auto& r : curve)
        out << fmt_num(r.M) << ' ' << fmt_num(r.N) << ' ' << fmt_num(r.measure) << ' ' << fmt_num(r.bound_shape) << '\n';
    return good_lambda_report(f, I, c.h, points, curve, spec);
}

ExperimentReport cmd_lil(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    LilSpec spec{quad(c), c.j_min, c.j_max, c.threads};
    const std::vector<double> xs = sample_points(c);
    ExperimentReport rep = lil_report(f, lil_profile(f, xs, spec), spec, c.epsilon);
    print_summary(rep, out);
    return rep;
}

ExperimentReport cmd_sobolev(const RunConfig& c, std::ostream& out) {
    std::vector<FunctionSource> family;
    for (const auto& s : c.family) family.push_back(parse_function(s));
    SobolevSpec spec{quad(c), c.panel_nodes, c.panel_width, c.grading_levels, c.refine, c.threads};
    const SobolevResult r = sobolev_compare(family, c.p, spec);
    for (const auto& row : r.rows) out << row.function << ' ' << fmt_num(row.p) << ' ' << fmt_num(row.ratio) << '\n';
    ExperimentReport rep = sobolev_report(r, c.p, spec);
    print_summary(rep, out);
    return rep;
}

ExperimentReport cmd_classify(const RunConfig& c, std::ostream& out) {
    const FunctionSource f = load_function(c);
    ClassifySpec spec{quad(c),   c.diff_j_min, c.diff_j_max, c.derivative_tol, c.delta2_bound,
                      c.j_min,   c.j_max,      c.threads};
    const std::vector<double> xs = sample_points(c);
    ExperimentReport rep = classify_report(f, classify_differentiability(f, xs, spec), spec);
    print_summary(rep, out);
    return rep;
}

void write_artifacts(const ExperimentReport& rep, const std::string& dir, const std::string& stem) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    const std::filesystem::path base = std::filesystem::path(dir) / stem;
    std::ofstream json(base.string() + ".json", std::ios::binary);
    json << rep.to_json();
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    rep.write_csv(csv);
    if (!json || !csv) throw std::runtime_error("cannot write artifacts under " + dir);
}

void diagnose(std::ostream& err, const std::string& kind, const std::string& message,
              std::optional<double> partial = std::nullopt) {
    ojson j;
    j["error"] = kind;
    j["message"] = message;
    if (partial) j["partial"] = *partial;
    err << j.dump() << '\n';
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

ojson read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadParameter("cannot open config file " + path);
    try {
        return ojson::parse(in);
    } catch (const ojson::parse_error& e) {
        throw BadParameter("config file " + path + ": " + e.what());
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Square functions, dyadic martingales and their numerical experiments", "sqlab"};
    app.set_help_flag("--help", "Print help and exit");
    app.require_subcommand(1, 1);
    Registry registry(app);
    register_all(registry, cfg);
    std::string config_file;
    app.add_option("--config", config_file, "JSON file of flag defaults (keys are flag names with _)");
    for (const auto& [name, help] : kCommands) app.add_subcommand(name, help)->fallthrough();
    app.get_subcommand("martingale")
        ->add_option("op", cfg.op, "lemma21|lemma22|lemma23|lemma24|trace|build (or --op)");

    try {
        if (const auto path = config_path(args)) registry.load(read_json_file(*path));
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        cfg.command = app.get_subcommands().front()->get_name();
        resolve(cfg);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        diagnose(err, "UsageError", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        diagnose(err, "BadParameter", e.what());
        return kExitUsage;
    }

    try {
        ExperimentReport rep;
        if (cfg.command == "eval") rep = cmd_eval(cfg, out);
        else if (cfg.command == "delta") rep = cmd_delta(cfg, out);
        else if (cfg.command == "sqfn") rep = cmd_sqfn(cfg, out);
        else if (cfg.command == "profile") rep = cmd_profile(cfg, out);
        else if (cfg.command == "martingale") rep = cmd_martingale(cfg, out);
        else if (cfg.command == "identity") rep = cmd_identity(cfg, out);
        else if (cfg.command == "goodlambda") rep = cmd_goodlambda(cfg, out);
        else if (cfg.command == "lil") rep = cmd_lil(cfg, out);
        else if (cfg.command == "sobolev") rep = cmd_sobolev(cfg, out);
        else rep = cmd_classify(cfg, out);
        ojson config = registry.dump();
        config["command"] = cfg.command;
        rep.config_json = config.dump();
        write_artifacts(rep, cfg.out, cfg.command == "martingale" ? rep.experiment : cfg.command);
        return kExitOk;
    } catch (const NoConvergence& e) {
        out << fmt_num(e.partial()) << '\n';
        diagnose(err, "NoConvergence", e.what(), e.partial());
        return kExitNoConvergence;
    } catch (const BadParameter& e) {
        diagnose(err, "BadParameter", e.what());
    } catch (const OutOfDomain& e) {
        diagnose(err, "OutOfDomain", e.what());
    } catch (const ScaleTooFine& e) {
        diagnose(err, "ScaleTooFine", e.what());
    } catch (const PreconditionFailed& e) {
        diagnose(err, "PreconditionFailed", e.what());
    } catch (const std::exception& e) {
        diagnose(err, "Error", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace sqlab::cli
