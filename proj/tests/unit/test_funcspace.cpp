#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sqlab/errors.hpp"
#include "sqlab/funcspace.hpp"

using namespace sqlab;

TEST_SUITE("funcspace") {

TEST_CASE("builtin evaluation") {
    CHECK(builtin::square()(3.0) == 9.0);
    CHECK(builtin::abs()(-2.0) == 2.0);
    CHECK(parse_function("affine:2,1")(3.0) == 7.0);
    CHECK(parse_function("affine:2")(3.0) == 6.0);
    CHECK(parse_function("constant:4")(-11.0) == 4.0);
    CHECK(parse_function("hat")(0.25) == doctest::Approx(0.75));
    CHECK(parse_function("hat")(1.5) == 0.0);
    CHECK(parse_function("abs-pow:0.5")(-4.0) == doctest::Approx(2.0));
    CHECK(parse_function("cube")(-2.0) == -8.0);
    const double k = 3.0;
    CHECK(builtin::gauss_sine(k)(0.4) == doctest::Approx(std::exp(-0.16) * std::sin(1.2)).epsilon(1e-15));
}

TEST_CASE("parse errors are validation errors") {
    CHECK_THROWS_AS(parse_function("nope"), BadParameter);
    CHECK_THROWS_AS(parse_function("square:1"), BadParameter);
    CHECK_THROWS_AS(parse_function("gauss-sine"), BadParameter);
    CHECK_THROWS_AS(parse_number_list("1,x"), BadParameter);
    CHECK_THROWS_AS(weierstrass_hardy(1.0), BadParameter);
    CHECK_THROWS_AS(weierstrass_hardy(2.0, 0), BadParameter);
}

TEST_CASE("labels round-trip through the parser") {
    for (const char* spec : {"square", "affine:2,0.5", "gauss-sine:3", "weierstrass:2,40", "abs-pow:0.25"}) {
        const FunctionSource f = parse_function(spec);
        const FunctionSource g = parse_function(f.label());
        for (double x : {-0.7, 0.1, 0.9}) CHECK(f(x) == g(x));
    }
}

TEST_CASE("grid functions interpolate linearly") {
    const FunctionSource g = make_grid({0.0, 1.0, 0.0}, 0.0, 1.0);
    CHECK(g(0.5) == 0.5);
    CHECK(g(1.0) == 1.0);
    CHECK(g(1.25) == doctest::Approx(0.75));
    CHECK(g.is_grid());
    CHECK(g.spacing() == 1.0);
    CHECK_THROWS_AS(g(0.0), OutOfDomain);
    CHECK_THROWS_AS(g(2.5), OutOfDomain);

    std::mt19937_64 rng(3);
    std::vector<double> ys(40);
    for (auto& y : ys) y = std::ldexp(static_cast<double>(rng() >> 11), -53);
    const FunctionSource h = make_grid(ys, -1.0, 0.125);
    for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
        const double x = -1.0 + 0.125 * static_cast<double>(i);
        CHECK(h(x) == doctest::Approx(ys[i]).epsilon(1e-14));
        const double mid = x + 0.0625;
        CHECK(h(mid) == doctest::Approx(0.5 * (ys[i] + ys[i + 1])).epsilon(1e-13));
    }
}

TEST_CASE("grid CSV parsing checks spacing") {
    std::istringstream ok("x,f\n0,1\n0.5,2\n1,3\n1.5,5\n");
    const FunctionSource g = parse_grid_csv(ok);
    CHECK(g(0.75) == doctest::Approx(2.5));
    std::istringstream uneven("0,1\n0.5,2\n1.2,3\n");
    CHECK_THROWS_AS(parse_grid_csv(uneven), BadParameter);
    std::istringstream tiny("0,1\n");
    CHECK_THROWS(parse_grid_csv(tiny));
}

TEST_CASE("shift") {
    const FunctionSource fs = shift(builtin::square(), 1.0);
    CHECK(fs(1.0) == 0.0);
    CHECK(fs(3.0) == 4.0);
    CHECK(shift(builtin::abs(), 2.0)(2.0) == 0.0);
    const FunctionSource hat = builtin::hat();
    const FunctionSource z = shift(hat, 0.0);
    for (double x = -2.0; x <= 2.0; x += 0.1) CHECK(z(x) == hat(x));
    const FunctionSource g = make_grid({0.0, 1.0, 4.0, 9.0}, 0.0, 1.0);
    CHECK(shift(g, 2.0)(3.5) == doctest::Approx(g(1.5)));
    CHECK(shift(g, 2.0).domain().contains(4.5));
    CHECK_FALSE(shift(g, 2.0).domain().contains(1.5));
}

TEST_CASE("shift round trip is exact") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (const char* spec : {"square", "abs", "hat", "gauss-sine:3", "weierstrass:2"}) {
        const FunctionSource f = parse_function(spec);
        for (int i = 0; i < 50; ++i) {
            const double s = U(rng);
            const double x = U(rng);
            const FunctionSource back = shift(shift(f, s), -s);
            CHECK(back(x) == f(x));
        }
    }
}

TEST_CASE("Weierstrass partial sums") {
    CHECK(weierstrass_hardy(2.0, 20)(0.0) == doctest::Approx(1.0 - std::ldexp(1.0, -20)).epsilon(1e-15));
    CHECK(weierstrass_hardy(2.0, 1)(std::numbers::pi) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(weierstrass_hardy(3.0, 10)(0.0) == doctest::Approx((1.0 - std::pow(3.0, -10)) / 2.0).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-4.0, 4.0);
    for (double b : {2.0, 3.0, 2.5}) {
        for (int i = 0; i < 200; ++i) {
            const double x = U(rng);
            // Independent oracle: direct cosine sum, largest terms first.
            double direct = 0.0;
            for (int n = 1; n <= 30; ++n) direct += std::pow(b, -n) * std::cos(std::pow(b, n) * x);
            const double tol = b == 2.0 ? 1e-12 : 1e-10;
            CHECK(std::abs(weierstrass_hardy(b, 30)(x) - direct) < tol);
        }
    }
}

TEST_CASE("Weierstrass tail bound") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 7.0);
    for (double b : {2.0, 3.0}) {
        for (int N = 1; N < 25; ++N) {
            const FunctionSource a = weierstrass_hardy(b, N);
            const FunctionSource c = weierstrass_hardy(b, N + 1);
            for (int i = 0; i < 20; ++i) {
                const double x = U(rng);
                CHECK(std::abs(c(x) - a(x)) <= std::pow(b, -(N + 1)) * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("cone height") {
    CHECK(cone_height(builtin::square(), 123.0).h0 == 1.0);
    const FunctionSource g = make_grid(std::vector<double>(11, 0.0), 0.0, 1.0);
    CHECK(cone_height(g, 0.5).h0 == doctest::Approx(0.25));
    CHECK(cone_height(g, 5.0).h0 == 1.0);
    CHECK_THROWS_AS(cone_height(g, 11.0), OutOfDomain);
    for (double x = 0.05; x < 2.0; x += 0.05)
        for (double y = 0.05; y < 2.0; y += 0.05)
            CHECK(std::abs(cone_height(g, x).h0 - cone_height(g, y).h0) <= std::abs(x - y) / 2.0 + 1e-15);
}

TEST_CASE("open domains") {
    const OpenDomain d({{0.0, 1.0}, {2.0, 5.0}});
    CHECK(d.contains(0.5));
    CHECK_FALSE(d.contains(1.0));
    CHECK_FALSE(d.contains(1.5));
    CHECK(d.contains_closed(2.5, 4.5));
    CHECK_FALSE(d.contains_closed(0.5, 2.5));
    CHECK(d.distance_to_complement(3.0) == doctest::Approx(1.0));
    CHECK(d.translated(1.0).contains(5.5));
    CHECK(OpenDomain::real_line().is_real_line());
}

}
