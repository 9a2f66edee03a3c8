#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "sqlab/errors.hpp"
#include "sqlab/martingale.hpp"

using namespace sqlab;

namespace {

MartingaleTrace one_step(double c) { return MartingaleTrace(DyadicGrid(), 1, {0.0, c, -c}); }

MartingaleTrace zero_trace(int depth) {
    return MartingaleTrace(DyadicGrid(), depth, std::vector<double>((std::size_t{2} << depth) - 1, 0.0));
}

double integral_of_square_increment(const MartingaleTrace& s, int n) {
    const auto top = s.generation(n);
    const double s0 = s.value(0, 0);
    double sum = 0.0;
    for (double v : top) sum += (v - s0) * (v - s0);
    return sum * s.grid().length(n);
}

}  // namespace

TEST_SUITE("martingale") {

TEST_CASE("dyadic grid geometry") {
    const DyadicGrid g(1.5, 0.25, 2);
    CHECK(g.left() == doctest::Approx(2.75));
    CHECK(g.right() == doctest::Approx(4.25));
    CHECK(g.length(3) == doctest::Approx(1.5 / 8));
    CHECK(g.contains(2.75));
    CHECK_FALSE(g.contains(4.25));
    CHECK(g.index_of(1, 3.5) == 1);
    CHECK(g.index_of(1, 3.49) == 0);
    const Interval iv = g.interval(2, 3);
    CHECK(iv.lo == doctest::Approx(2.75 + 3 * 0.375));
    CHECK(iv.hi == doctest::Approx(4.25));
    CHECK_THROWS_AS(g.index_of(1, 4.25), OutOfDomain);
    CHECK_THROWS_AS(DyadicGrid(4.0), BadParameter);
    CHECK_THROWS_AS(DyadicGrid(0.5), BadParameter);
    const DyadicGrid c = DyadicGrid::containing(2.0, 0.5, -3.2);
    CHECK(c.contains(-3.2));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(2.75, 4.25);
    for (int i = 0; i < 2000; ++i) {
        const double x = U(rng);
        for (int k = 0; k <= 12; ++k) {
            const Interval in = g.interval(k, g.index_of(k, x));
            CHECK((in.lo <= x && x < in.hi));
        }
    }
}

TEST_CASE("martingale of the square") {
    const MartingaleTrace s = build_from_function(builtin::square(), DyadicGrid(), 1);
    CHECK(s.value(0, 0) == doctest::Approx(1.0));
    CHECK(s.value(1, 0) == doctest::Approx(0.5));
    CHECK(s.value(1, 1) == doctest::Approx(1.5));
    const StepFunction qv = quadratic_variation(s, 1);
    for (double v : qv.values()) CHECK(v == doctest::Approx(0.25));
    const StepFunction m = maximal(s, 1);
    CHECK(m.values()[0] == doctest::Approx(1.0));
    CHECK(m.values()[1] == doctest::Approx(1.5));
}

TEST_CASE("martingale of an affine function") {
    const MartingaleTrace s = build_from_function(builtin::affine(-2.0, 5.0), DyadicGrid(1.25, 0.3), 6);
    for (int k = 0; k <= 6; ++k)
        for (double v : s.generation(k)) CHECK(v == doctest::Approx(-2.0).epsilon(1e-13));
    const StepFunction qv = quadratic_variation(s, 6);
    for (double v : qv.values()) CHECK(v < 1e-20);
    const StepFunction m = maximal(s, 6);
    for (double v : m.values()) CHECK(v == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("random martingales") {
    const MartingaleTrace s = random_martingale(42, 1, IncrementLaw::parse("uniform:1"));
    CHECK(s.value(0, 0) == 0.0);
    CHECK(s.value(1, 0) == -s.value(1, 1));
    CHECK(std::abs(s.value(1, 0)) <= 1.0);
    const MartingaleTrace pm = random_martingale(42, 9, IncrementLaw::parse("pm:1"));
    for (int n = 0; n <= 9; ++n) {
        const StepFunction qv = quadratic_variation(pm, n);
        for (double v : qv.values()) CHECK(v == doctest::Approx(n));
    }
    const MartingaleTrace again = random_martingale(42, 9, IncrementLaw::parse("pm:1"));
    for (int k = 0; k <= 9; ++k) {
        const auto a = pm.generation(k);
        const auto b = again.generation(k);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
    CHECK(IncrementLaw::parse("uniform:0.7").describe() == "uniform:0.7");
    CHECK_THROWS_AS(IncrementLaw::parse("pm:0"), BadParameter);
    CHECK_THROWS_AS(IncrementLaw::parse("gauss:1"), BadParameter);
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(7, i));
    CHECK(seeds.size() == 1000);
}

TEST_CASE("lemma examples on one-step martingales") {
    CHECK(lemma21_integral(one_step(1.0), 1) == doctest::Approx(std::cosh(1.0) * std::exp(-0.5)).epsilon(1e-15));
    CHECK(lemma21_integral(zero_trace(3), 3) == doctest::Approx(1.0));
    const double small = lemma21_integral(one_step(0.1), 1);
    CHECK(small == doctest::Approx(std::cosh(0.1) * std::exp(-0.005)).epsilon(1e-15));
    CHECK(small < 1.0);

    CHECK(lemma22_tail_measure(one_step(1.0), 1, 0.4) == doctest::Approx(0.5));
    CHECK(lemma22_tail_measure(one_step(1.0), 1, 0.6) == 0.0);
    CHECK(lemma22_tail_measure(zero_trace(4), 4, 0.01) == 0.0);

    CHECK(lemma23_exp_moment(zero_trace(2), 2, 0.5) == doctest::Approx(1.0));
    CHECK(lemma23_exp_moment(one_step(1.0), 1, 0.5) == doctest::Approx(0.5 * (std::exp(0.25) + 1.0)).epsilon(1e-15));
    CHECK(lemma23_exp_moment(one_step(1.0), 1, 0.9) == doctest::Approx(0.5 * (std::exp(0.45) + 1.0)).epsilon(1e-15));

    CHECK(lemma24_stopped_qv(zero_trace(3)).value() == 0.0);
    const StoppedVariation half = lemma24_stopped_qv(one_step(0.5));
    CHECK(half.set_measure == doctest::Approx(1.0));
    CHECK(half.value() == doctest::Approx(0.25));
    const StoppedVariation two = lemma24_stopped_qv(one_step(2.0));
    CHECK(two.set_measure == 0.0);
    CHECK(two.value() == 0.0);

    const StepFunction drift = drift_maximal(zero_trace(3), 3);
    for (double v : drift.values()) CHECK(v == 0.0);
}

TEST_CASE("lemma preconditions") {
    const MartingaleTrace shifted(DyadicGrid(), 1, {1.0, 2.0, 0.0});
    CHECK_THROWS_AS(lemma21_integral(shifted, 1), PreconditionFailed);
    CHECK_THROWS_AS(lemma22_tail_measure(shifted, 1, 1.0), PreconditionFailed);
    CHECK_THROWS_AS(lemma22_tail_measure(one_step(1.0), 1, 0.0), BadParameter);
    CHECK_THROWS_AS(lemma23_exp_moment(one_step(1.0), 1, 1.0), BadParameter);
    CHECK_THROWS_AS(lemma21_integral(one_step(1.0), 2), BadParameter);
    CHECK(lemma21_integral(shifted.centered(), 1) == doctest::Approx(std::cosh(1.0) * std::exp(-0.5)));
}

TEST_CASE("contracts over random traces") {
    const double lambdas[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    const double alphas[] = {0.3, 0.6, 0.9};
    std::mt19937_64 pick(99);
    int violations = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const int depth = 2 + static_cast<int>(pick() % 11);
        const double rho = 1.0 + static_cast<double>(pick() % 3);
        const IncrementLaw law{i % 2 ? IncrementKind::Uniform : IncrementKind::PlusMinus, 0.25 + 0.25 * static_cast<double>(i % 7)};
        const MartingaleTrace s = random_martingale(derive_seed(2024, i), depth, law, DyadicGrid(rho));
        const double I0 = s.grid().length(0);
        const double slack = kContractSlack * I0;
        CHECK(s.martingale_defect() <= 1e-13);
        if (lemma21_integral(s, depth) > I0 + slack) ++violations;
        for (double l : lambdas)
            if (lemma22_tail_measure(s, depth, l) > std::exp(-l) * I0 + slack) ++violations;
        for (double a : alphas)
            if (lemma23_exp_moment(s, depth, a) > I0 / (1.0 - a) + slack) ++violations;
        const double lhs = integral_of_square_increment(s, depth);
        const double rhs = quadratic_variation(s, depth).integral();
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
    }
    CHECK(violations == 0);
}

TEST_CASE("stopped martingales stay martingales") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        const MartingaleTrace s = random_martingale(derive_seed(5, i), 10, IncrementLaw::parse("uniform:0.6"));
        const MartingaleTrace t = stop(s, [](const NodeState& n) { return std::abs(n.value) >= 1.0 || n.qv > 2.0; });
        CHECK(t.martingale_defect() <= 1e-13);
        for (std::size_t j = 0; j < t.generation(10).size(); ++j) {
            bool frozen = false;
            double at = 0.0;
            for (int k = 0; k <= 10; ++k) {
                const double v = t.value(k, j >> (10 - k));
                if (frozen) CHECK(v == at);
                if (!frozen && (std::abs(v) >= 1.0)) {
                    frozen = true;
                    at = v;
                }
            }
        }
    }
}

TEST_CASE("telescoping and path values") {
    std::mt19937_64 rng(8);
    for (const char* spec : {"square", "gauss-sine:3", "weierstrass:2", "hat"}) {
        const FunctionSource f = parse_function(spec);
        const DyadicGrid g = DyadicGrid::containing(1.7, 0.2, -0.4);
        const MartingaleTrace s = build_from_function(f, g, 12);
        const double total = f(g.right()) - f(g.left());
        for (int k = 0; k <= 12; ++k) {
            double sum = 0.0;
            for (double v : s.generation(k)) sum += v * g.length(k);
            CHECK(sum == doctest::Approx(total).epsilon(1e-11).scale(1.0));
        }
        CHECK(s.martingale_defect() <= 1e-9);
        std::uniform_real_distribution<double> U(g.left(), g.right());
        for (int i = 0; i < 100; ++i) {
            const double x = U(rng);
            const auto path = path_values(f, g, x, 12);
            for (int k = 0; k <= 12; ++k) CHECK(path[k] == doctest::Approx(s.value_at(k, x)).epsilon(1e-12).scale(1e-12));
        }
    }
}

TEST_CASE("step functions") {
    const StepFunction f(DyadicGrid(2.0), 2, {1.0, -1.0, 3.0, 0.5});
    CHECK(f.integral() == doctest::Approx(0.5 * 3.5));
    CHECK(f.measure_where([](double v) { return v > 0.75; }) == doctest::Approx(1.0));
    CHECK(f.value_at(1.2) == 3.0);
}

TEST_CASE("trace CSV export") {
    const MartingaleTrace s = one_step(0.5);
    std::ostringstream os;
    s.write_csv(os);
    const std::string text = os.str();
    CHECK(text.rfind("# schema_version: 1\n", 0) == 0);
    CHECK(text.find("generation,index,value\n") != std::string::npos);
    CHECK(text.find("1,1,-0.5\n") != std::string::npos);
}

}
