#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sqlab/cli.hpp"
#include "sqlab/differences.hpp"
#include "sqlab/errors.hpp"
#include "sqlab/experiments.hpp"
#include "sqlab/funcspace.hpp"
#include "sqlab/martingale.hpp"
#include "sqlab/plane.hpp"
#include "sqlab/sqfn.hpp"

namespace py = pybind11;
using namespace sqlab;

namespace {

py::dict identity_dict(const IdentityResult& r) {
    py::dict d;
    d["lhs"] = r.lhs;
    d["rhs"] = r.rhs;
    d["rel_error"] = r.rel_error;
    d["rhs_previous"] = r.rhs_previous;
    d["rho_nodes"] = r.rho_nodes;
    d["s_nodes"] = r.s_nodes;
    d["rhs_converged"] = r.rhs_converged;
    return d;
}

}  // namespace

PYBIND11_MODULE(sqlab, m) {
    m.doc() = "Conical square functions, divided differences and dyadic martingales.";

    py::register_exception<OutOfDomain>(m, "OutOfDomain", PyExc_ValueError);
    py::register_exception<BadParameter>(m, "BadParameter", PyExc_ValueError);
    py::register_exception<ScaleTooFine>(m, "ScaleTooFine", PyExc_ValueError);
    py::register_exception<PreconditionFailed>(m, "PreconditionFailed", PyExc_RuntimeError);
    py::register_exception<NoConvergence>(m, "NoConvergence", PyExc_RuntimeError);
    // NoConvergence carries its partial value as args[1].
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const NoConvergence& e) {
            py::object cls = py::module_::import("sqlab").attr("NoConvergence");
            PyErr_SetObject(cls.ptr(), py::make_tuple(e.what(), e.partial()).ptr());
        }
    });

    py::class_<QuadratureSpec>(m, "QuadratureSpec")
        .def(py::init<>())
        .def(py::init([](int nodes, double tolerance, int max_levels, double absolute_floor, int max_bands) {
                 QuadratureSpec q{nodes, tolerance, max_levels, absolute_floor, max_bands};
                 q.validate();
                 return q;
             }),
             py::arg("nodes") = 8, py::arg("tolerance") = 1e-6, py::arg("max_levels") = 7,
             py::arg("absolute_floor") = 1e-15, py::arg("max_bands") = 48)
        .def_readwrite("nodes", &QuadratureSpec::nodes)
        .def_readwrite("tolerance", &QuadratureSpec::tolerance)
        .def_readwrite("max_levels", &QuadratureSpec::max_levels)
        .def_readwrite("absolute_floor", &QuadratureSpec::absolute_floor)
        .def_readwrite("max_bands", &QuadratureSpec::max_bands);

    py::class_<FunctionSource>(m, "Function")
        .def(py::init([](const std::string& spec) { return parse_function(spec); }), py::arg("spec"))
        .def("__call__", &FunctionSource::evaluate, py::arg("x"))
        .def("derivative", &FunctionSource::derivative, py::arg("x"))
        .def("shifted", &FunctionSource::shifted, py::arg("s"))
        .def_property_readonly("label", &FunctionSource::label)
        .def("__repr__", [](const FunctionSource& f) { return "Function('" + f.label() + "')"; });

    m.def("weierstrass", &weierstrass_hardy, py::arg("b"), py::arg("terms") = 40);
    m.def("grid_function", &make_grid, py::arg("samples"), py::arg("origin"), py::arg("spacing"));
    m.def("cone_height", [](const FunctionSource& f, double x) { return cone_height(f, x).h0; });

    m.def("delta", &delta, py::arg("f"), py::arg("x"), py::arg("t"));
    m.def("delta2", &delta2, py::arg("f"), py::arg("x"), py::arg("t"));

    const QuadratureSpec q0{};
    m.def("conical_A2", &conical_A2, py::arg("f"), py::arg("x"), py::arg("h"), py::arg("quad") = q0);
    m.def("vertical_g2", &vertical_g2, py::arg("f"), py::arg("x"), py::arg("delta"), py::arg("quad") = q0);
    m.def("averaged_difference", &averaged_difference, py::arg("f"), py::arg("x"), py::arg("y"), py::arg("quad") = q0);
    m.def("mean_divided_diff", &mean_divided_diff, py::arg("f"), py::arg("x"), py::arg("h"), py::arg("quad") = q0);
    m.def("mean_dd_star", &mean_dd_star, py::arg("f"), py::arg("x"), py::arg("h"), py::arg("quad") = q0);
    m.def("tilde_A2", &tilde_A2, py::arg("f"), py::arg("x"), py::arg("y"), py::arg("quad") = q0);
    m.def("discrete_A2", &discrete_A2, py::arg("f"), py::arg("x"), py::arg("N"), py::arg("quad") = q0);

    m.def(
        "sphere_A2",
        [](const std::string& spec, std::pair<double, double> p, double h, int M) {
            return sphere_A2(parse_function2d(spec), Vec2{p.first, p.second}, h, M);
        },
        py::arg("f"), py::arg("p"), py::arg("h"), py::arg("M"));
    m.def(
        "directional_A2",
        [](const std::string& spec, std::pair<double, double> p, std::pair<double, double> xi, double h) {
            return directional_A2(parse_function2d(spec), Vec2{p.first, p.second}, Vec2{xi.first, xi.second}, h);
        },
        py::arg("f"), py::arg("p"), py::arg("xi"), py::arg("h"));

    m.def(
        "check_identity",
        [](const FunctionSource& f, double x, double y, const std::string& which) {
            if (which == "a") return identity_dict(check_identity_a(f, x, y));
            if (which == "b") return identity_dict(check_identity_b(f, x, y));
            throw BadParameter("which must be 'a' or 'b'");
        },
        py::arg("f"), py::arg("x"), py::arg("y"), py::arg("which") = "a");

    m.def(
        "random_martingale_values",
        [](std::uint64_t seed, int depth, const std::string& law, double rho) {
            const MartingaleTrace s = random_martingale(seed, depth, IncrementLaw::parse(law), DyadicGrid(rho));
            std::vector<std::vector<double>> out;
            for (int k = 0; k <= depth; ++k) {
                auto g = s.generation(k);
                out.emplace_back(g.begin(), g.end());
            }
            return out;
        },
        py::arg("seed"), py::arg("depth"), py::arg("law") = "pm:1", py::arg("rho") = 1.0);
    m.def(
        "martingale_lemmas",
        [](std::uint64_t seed, int depth, const std::string& law, double rho, double lambda, double alpha) {
            const MartingaleTrace s = random_martingale(seed, depth, IncrementLaw::parse(law), DyadicGrid(rho));
            py::dict d;
            d["integral"] = lemma21_integral(s, depth);
            d["tail_measure"] = lemma22_tail_measure(s, depth, lambda);
            d["exp_moment"] = lemma23_exp_moment(s, depth, alpha);
            d["stopped_qv"] = lemma24_stopped_qv(s).by_depth;
            d["quadratic_variation"] = quadratic_variation(s, depth).integral();
            return d;
        },
        py::arg("seed"), py::arg("depth"), py::arg("law") = "pm:1", py::arg("rho") = 1.0, py::arg("lambda_") = 1.0,
        py::arg("alpha") = 0.5);
    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"));

    m.def(
        "zygmund_growth",
        [](const FunctionSource& f, const std::vector<double>& xs, int j_min, int j_max, const QuadratureSpec& quad) {
            GrowthSpec spec;
            spec.quad = quad;
            spec.j_min = j_min;
            spec.j_max = j_max;
            py::list out;
            for (const auto& g : zygmund_growth(f, xs, spec)) {
                py::dict d;
                d["x"] = g.x;
                d["slope"] = g.slope;
                d["r2"] = g.r2;
                d["values"] = g.values;
                out.append(d);
            }
            return out;
        },
        py::arg("f"), py::arg("xs"), py::arg("j_min") = 4, py::arg("j_max") = 18,
        py::arg("quad") = QuadratureSpec{8, 1e-4, 5, 1e-9, 48});

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            std::ostringstream err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one CLI subcommand; returns (exit_code, stdout, stderr).");
}
