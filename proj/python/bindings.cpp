#include "leraykit/duality.hpp"
#include "leraykit/experiment.hpp"
#include "leraykit/invariants.hpp"
#include "leraykit/pairing.hpp"
#include "leraykit/rigid.hpp"
#include "leraykit/transforms.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace leray;

namespace {

struct Surface {
    SurfacePtr s;
};

PairingContext context(const Surface& s, int res) {
    return make_pairing_context(std::make_shared<QuadratureMesh>(mesh(s.s, res)));
}

py::dict invariants_at(const Surface& s, const VecC& z) {
    PointInvariants pi = point_invariants(jet2(*s.s, z));
    py::dict d;
    d["b"] = pi.b;
    d["phi"] = pi.phi;
    d["phi_det"] = pi.phi_det;
    d["fefferman_w"] = pi.fefferman_w;
    d["sharp_w"] = pi.sharp_w;
    d["strongly_convex"] = pi.convexity.strongly_convexlike;
    return d;
}

py::dict efficiency(const Surface& s, int res, int degree) {
    EfficiencyResult e = efficiency_identity(context(s, res), degree);
    py::dict d;
    d["infsup"] = e.infsup;
    d["norm"] = e.norm;
    d["residual"] = e.residual;
    d["basis_size"] = e.basis_size;
    d["dual_basis_size"] = e.dual_basis_size;
    return d;
}

py::dict transfer_report(const Surface& s, int res) {
    TransferResiduals r = transfer_residuals(context(s, res));
    py::dict d;
    d["isometry"] = r.isometry;
    d["double_transfer"] = r.double_transfer;
    d["route_agreement"] = r.route_agreement;
    return d;
}

double rigid_residual_max(const std::string& expr, double h, double margin) {
    LambdaField lam = make_lambda(Grid2D::with_spacing(0.5, 1.5, -0.5, 0.5, h), Expression::parse(expr));
    return cropped_max(rigid_residual(lam), margin);
}

py::dict run_config(const std::string& text) {
    Report r = run(parse_config_text(text));
    py::dict d;
    d["json"] = dump_json(r.payload);
    d["csv"] = r.csv;
    d["pass"] = r.pass;
    return d;
}

}  // namespace

PYBIND11_MODULE(_leraykit, m) {
    m.doc() = "Projective invariants, duality and Leray transforms of convex hypersurfaces";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<Surface>(m, "Surface")
        .def_property_readonly("dim", [](const Surface& s) { return s.s->dim(); })
        .def_property_readonly("family", [](const Surface& s) { return s.s->family(); })
        .def("__repr__", [](const Surface& s) { return "<Surface " + s.s->family() + ">"; });

    m.def("sphere", [](int n, double r) { return Surface{make_sphere(n, r)}; }, py::arg("n") = 2, py::arg("radius") = 1.0);
    m.def("circle", [](double r, cd c) { return Surface{make_circle(r, c)}; }, py::arg("radius") = 1.0,
          py::arg("center") = cd(0));
    m.def("ellipse", [](double a, double b) { return Surface{make_ellipse(a, b)}; }, py::arg("a"), py::arg("b") = 1.0);
    m.def("lp_sphere", [](double p) { return Surface{make_lp_sphere(p)}; }, py::arg("p"));
    m.def("power_graph", [](double g) { return Surface{make_power_graph(g)}; }, py::arg("gamma"));
    m.def("sigma3", [](double a, cd b) { return Surface{make_sigma3(a, b)}; }, py::arg("alpha"), py::arg("beta"));
    m.def("tube", [](double c) { return Surface{make_tube(c)}; }, py::arg("c") = 1.0);
    m.def("custom_graph", [](const std::string& e, int n) { return Surface{make_custom_graph(e, n)}; }, py::arg("expr"),
          py::arg("n") = 2);
    m.def("mobius_image", [](const Surface& base, const MatC& M) { return Surface{make_mobius_image(base.s, MobiusMap(M))}; },
          py::arg("base"), py::arg("matrix"));
    m.def("surface_from_config", [](const std::string& text) { return Surface{build_surface(Json::parse(text))}; });

    m.def("invariants", &invariants_at, py::arg("surface"), py::arg("z"));
    m.def("dual_point", [](const Surface& s, const VecC& z) { return dual_point(*s.s, z); }, py::arg("surface"),
          py::arg("z"));
    m.def("roundtrip_error", [](const Surface& s, const VecC& z) { return (roundtrip(*s.s, z) - z).norm(); });
    m.def("area", [](const Surface& s, int res) { return mesh(s.s, res).weights.sum(); }, py::arg("surface"),
          py::arg("resolution"));
    m.def("cauchy_norm", [](const Surface& s, int res) { return operator_norm(cauchy_matrix(context(s, res), +1)); },
          py::arg("surface"), py::arg("resolution"));
    m.def("leray_norm", [](const Surface& s, int res) { return operator_norm(leray_matrix(context(s, res))); },
          py::arg("surface"), py::arg("resolution"));
    m.def("efficiency", &efficiency, py::arg("surface"), py::arg("resolution"), py::arg("degree") = 4);
    m.def("transfer_residuals", &transfer_report, py::arg("surface"), py::arg("resolution"));
    m.def("rigid_residual_max", &rigid_residual_max, py::arg("expr"), py::arg("h"), py::arg("margin") = 0.2);
    m.def("run_config", &run_config, py::arg("config_json"));
}
