#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sqlab/cli.hpp"

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = sqlab::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("sqlab-cli-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("documented invocations") {
    const Outcome a = run({"sqfn", "--f", "square", "--x", "1", "--h", "0.5"});
    CHECK(a.code == 0);
    CHECK(a.out == "0.75\n");

    const Outcome b = run({"identity", "--which", "a", "--f", "affine:2", "--x", "0", "--y", "0.5"});
    CHECK(b.code == 0);
    std::istringstream fields(b.out);
    double lhs = 0, rhs = 0, err = 1;
    fields >> lhs >> rhs >> err;
    CHECK(err < 1e-8);
    CHECK(lhs == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));

    const Outcome c = run({"martingale", "lemma21", "--law", "pm:1", "--depth", "1", "--trials", "1", "--seed", "7"});
    CHECK(c.code == 0);
    CHECK(std::stod(c.out) == doctest::Approx(std::cosh(1.0) * std::exp(-0.5)).epsilon(1e-11));
    CHECK(std::stod(c.out) <= 1.0);

    const Outcome d = run({"martingale", "--op", "lemma21", "--depth", "1", "--trials", "1", "--seed", "7"});
    CHECK(d.code == 0);
    CHECK(d.out == c.out);
    CHECK(run({"martingale", "--depth", "3"}).code == sqlab::cli::kExitUsage);
}

TEST_CASE("numbers are printed with twelve significant digits") {
    const Outcome r = run({"sqfn", "--op", "discrete", "--f", "square", "--x", "1", "--levels", "2"});
    CHECK(r.out == "0.28125\n");
    const Outcome q = run({"delta", "--f", "cube", "--x", "1", "--t", "0.3"});
    CHECK(q.out == "3.09\n");
    const Outcome e = run({"eval", "--f", "square", "--x", "0.5,-3"});
    CHECK(e.out == "0.25\n9\n");
}

TEST_CASE("validation errors exit with 2 and a JSON diagnostic") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {},
             {"frobnicate"},
             {"sqfn", "--f", "square", "--x", "1", "--bogus"},
             {"sqfn", "--f", "nope", "--x", "1"},
             {"sqfn", "--f", "square"},
             {"sqfn", "--f", "square", "--x", "1", "--tolerance", "0.5"},
             {"identity", "--which", "c", "--x", "0"},
             {"martingale", "lemma23", "--alpha", "1.5"},
             {"martingale"},
         }) {
        const Outcome r = run(args);
        CHECK(r.code == 2);
        const auto j = nlohmann::json::parse(r.err);
        CHECK(j.contains("error"));
        CHECK(j.contains("message"));
    }
}

TEST_CASE("non-convergence exits with 3 and the partial value") {
    const Outcome r = run({"sqfn", "--f", "weierstrass:2", "--x", "0.3", "--h", "0", "--max-bands", "6"});
    CHECK(r.code == 3);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"] == "NoConvergence");
    CHECK(std::stod(r.out) == doctest::Approx(j["partial"].get<double>()).epsilon(1e-11));
}

TEST_CASE("help") {
    const Outcome r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("martingale") != std::string::npos);
}

TEST_CASE("config file precedence") {
    const auto dir = scratch("config");
    {
        std::ofstream cfg(dir / "c.json");
        cfg << R"({"f": "square", "x": [1.0], "h": 0.25})";
    }
    const std::string path = (dir / "c.json").string();
    CHECK(run({"sqfn", "--config", path}).out == "0.9375\n");
    CHECK(run({"sqfn", "--config", path, "--h", "0.5"}).out == "0.75\n");
    {
        std::ofstream cfg(dir / "bad.json");
        cfg << R"({"f": "square", "colour": "blue"})";
    }
    const Outcome bad = run({"sqfn", "--config", (dir / "bad.json").string(), "--x", "1"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("colour") != std::string::npos);
    {
        std::ofstream cfg(dir / "type.json");
        cfg << R"({"h": "wide"})";
    }
    CHECK(run({"sqfn", "--config", (dir / "type.json").string(), "--x", "1"}).code == 2);
}

TEST_CASE("reports are byte-identical and self-describing") {
    const auto dir = scratch("repro");
    const std::vector<std::string> args{"martingale", "lemma22", "--law",    "uniform:0.8", "--depth", "8",
                                        "--trials",   "40",      "--seed",   "11",          "--threads", "3",
                                        "--out",      dir.string()};
    REQUIRE(run(args).code == 0);
    const std::string first = slurp(dir / "martingale-lemma22.json");
    REQUIRE(run(args).code == 0);
    CHECK(slurp(dir / "martingale-lemma22.json") == first);
    const auto j = nlohmann::ordered_json::parse(first);
    CHECK(j["schema_version"] == 1);
    CHECK(j["config"]["seed"] == 11);
    CHECK(j["config"]["law"] == "uniform:0.8");
    CHECK(j["config"]["command"] == "martingale");
    CHECK(j["config"]["tolerance"].get<double>() > 0.0);
    CHECK(j["verdicts"]["tail_le_exp_minus_lambda"] == "pass");
    CHECK(slurp(dir / "martingale-lemma22.csv").rfind("# schema_version: 1\n", 0) == 0);

    std::vector<std::string> other = args;
    other[9] = "12";
    REQUIRE(run(other).code == 0);
    CHECK(slurp(dir / "martingale-lemma22.json") != first);
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    ::setenv("SQLAB_OUT_DIR", dir.string().c_str(), 1);
    const Outcome r = run({"delta", "--f", "square", "--x", "1", "--t", "0.5"});
    ::unsetenv("SQLAB_OUT_DIR");
    CHECK(r.out == "2\n");
    CHECK(std::filesystem::exists(dir / "delta.json"));
    CHECK(std::filesystem::exists(dir / "delta.csv"));
}

TEST_CASE("martingale trace export") {
    const Outcome r = run({"martingale", "trace", "--depth", "2", "--law", "pm:0.5", "--seed", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("generation,index,value") != std::string::npos);
    const Outcome b = run({"martingale", "build", "--f", "square", "--depth", "1", "--x", "0.2"});
    CHECK(b.out.find("1,0,0.5\n") != std::string::npos);
    CHECK(b.out.find("1,1,1.5\n") != std::string::npos);
}

}
