// Python module cwcs_py: thin wrappers returning plain dicts.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "cwcs/adiabatic.hpp"
#include "cwcs/characters.hpp"
#include "cwcs/connection.hpp"
#include "cwcs/geometry.hpp"
#include "cwcs/random_fields.hpp"
#include "cwcs/spectral.hpp"

namespace py = pybind11;
using namespace cwcs;

namespace {

CatalogParams params(int k, int resolution) {
  CatalogParams p;
  p.k = k;
  p.resolution = resolution;
  return p;
}

py::dict eta_dict(const EtaReport& r) {
  py::dict d;
  d["a"] = r.a;
  d["offset"] = r.offset;
  d["h"] = r.h;
  d["eta"] = r.hurwitz;
  d["abel"] = r.abel;
  d["xi"] = r.xi;
  d["divergent"] = r.divergent;
  return d;
}

}  // namespace

PYBIND11_MODULE(cwcs_py, m) {
  m.doc() = "Differential characters on chart grids";

  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CharacterError>(m, "CharacterError", PyExc_ValueError);
  py::register_exception<SpectralError>(m, "SpectralError", PyExc_ValueError);

  m.def("catalog_names", &catalog_names);

  m.def("chern_number", [](const std::string& name, int k, int resolution) {
    return chern_number(catalog(name, params(k, resolution)), "bundle");
  }, py::arg("name"), py::arg("k") = 1, py::arg("resolution") = 0);

  m.def("todd_genus", [](const std::string& name, int resolution) {
    return todd_genus(catalog(name, params(1, resolution)));
  }, py::arg("name") = "cp1_tangent", py::arg("resolution") = 0);

  m.def("ch_todd", [](const std::string& name, int k, int resolution) {
    return ch_todd_integral(catalog(name, params(k, resolution)), "bundle", "tangent");
  }, py::arg("name"), py::arg("k") = 1, py::arg("resolution") = 0,
     "int ch(bundle) Todd(tangent) over a closed catalog geometry");

  m.def("disk_angle", [](double a, int resolution) {
    return angle_pairing(disk_cycle(a, resolution)).value;
  }, py::arg("a"), py::arg("resolution") = 0);

  m.def("zn_pairing", [](int n, int k, int resolution) {
    const ZnReport r = zn_pairing(zn_pair(n, k, resolution));
    py::dict d;
    d["value"] = r.value.value;
    d["order_residual"] = r.order_residual;
    return d;
  }, py::arg("n"), py::arg("k"), py::arg("resolution") = 0);

  m.def("pushforward", [](double a, int m_deg, int resolution) {
    const PushforwardReport r = pushforward_character(pushforward_example(a, m_deg, resolution));
    py::dict d;
    d["total_space"] = r.total_space;
    d["base_route"] = r.base_route;
    d["chain_residual"] = r.chain_residual;
    return d;
  }, py::arg("a"), py::arg("m"), py::arg("resolution") = 0);

  m.def("transgression_residual", [](int dim, int n, int l, unsigned seed) {
    auto g = torus(dim, n).grid;
    std::mt19937 rng(seed);
    auto c0 = Connection::from_potential("A0", random_form(g, 1, 2, 0.02, rng));
    auto c1 = Connection::from_potential("A1", random_form(g, 1, 2, 0.02, rng));
    return transgression_residual(ConnectionCurve(c0, c1), l);
  }, py::arg("dim"), py::arg("n"), py::arg("l"), py::arg("seed") = 1,
     "max |d TP_l - (tr R1^l - tr R0^l)| for a random rank-2 pair on a torus");

  m.def("hopf_certificate", [](int l_max, int resolution, bool control) {
    const CertificateReport r = cs_triviality_certificate(hopf_frame(resolution), l_max, control);
    py::dict d;
    d["pass"] = r.pass;
    d["bracket"] = r.bracket;
    d["db_vertical"] = r.db_vertical;
    d["db_horizontal"] = r.db_horizontal;
    d["curvature_split"] = r.curvature_split;
    d["split_tolerance"] = r.split_tolerance;
    py::list levels;
    for (const auto& lev : r.levels) {
      py::dict e;
      e["l"] = lev.l;
      e["frame_trace"] = lev.frame_trace;
      e["form_trace"] = lev.form_trace;
      levels.append(e);
    }
    d["levels"] = levels;
    return d;
  }, py::arg("l_max") = 2, py::arg("resolution") = 16, py::arg("control") = false);

  m.def("hurwitz_zeta", [](double s, double x) { return hurwitz_zeta(s, x); },
        py::arg("s"), py::arg("x"));

  m.def("eta_invariant", [](double a, bool bounding_spin) {
    CircleDiracSpec spec;
    spec.a = a;
    spec.bounding_spin = bounding_spin;
    return eta_dict(eta_invariant(spec));
  }, py::arg("a"), py::arg("bounding_spin") = false);

  m.def("calibrate_aps_sign", &calibrate_aps_sign, py::arg("resolution") = 32);

  m.def("aps_check", [](double a, int sigma, int resolution) {
    const ApsReport r = aps_mod1_check(a, disk_cycle(a, resolution), sigma);
    py::dict d;
    d["a"] = r.a;
    d["eta"] = r.eta;
    d["h"] = r.h;
    d["xi"] = r.xi;
    d["angle"] = r.angle;
    d["sigma"] = r.sigma;
    d["residual"] = r.residual;
    return d;
  }, py::arg("a"), py::arg("sigma"), py::arg("resolution") = 32);
}
