#include "kslab/config.hpp"
#include "kslab/convergence.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/inequalities.hpp"
#include "kslab/model.hpp"
#include "kslab/output.hpp"
#include "kslab/simulation.hpp"
#include "kslab/sweep.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using nlohmann::json;

namespace {

py::array_t<double> to_array(const kslab::Field& f, const kslab::Grid& g) {
  const auto& v = f.values();
  if (g.geometry() == kslab::Geometry::radial_disk) return py::array_t<double>(v.size(), v.data());
  py::array_t<double> a({g.ny(), g.nx()});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<double> flatten(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                            const kslab::Grid& g) {
  if (static_cast<std::size_t>(a.size()) != g.size()) throw kslab::GridMismatch("array size does not match the grid");
  return {a.data(), a.data() + a.size()};
}

kslab::Grid grid_of(const std::string& config) { return kslab::parse_config_text(config).grid.build(); }

py::dict run_config(const std::string& config) {
  const kslab::RunConfig cfg = kslab::parse_config_text(config);
  kslab::RunResult r;
  {
    py::gil_scoped_release release;
    r = kslab::run(cfg);
  }
  py::dict out;
  out["summary"] = r.summary().dump();
  std::vector<double> t, mass, sup_u, energy;
  for (const auto& rec : r.series) {
    t.push_back(rec.t);
    mass.push_back(rec.mass);
    sup_u.push_back(rec.sup_u);
    energy.push_back(rec.energy_y);
  }
  out["t"] = py::array_t<double>(t.size(), t.data());
  out["mass"] = py::array_t<double>(mass.size(), mass.data());
  out["sup_u"] = py::array_t<double>(sup_u.size(), sup_u.data());
  out["energy_y"] = py::array_t<double>(energy.size(), energy.data());
  if (r.final_state) {
    out["u"] = to_array(r.final_state->u, r.final_state->grid);
    out["v"] = to_array(r.final_state->v, r.final_state->grid);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_kslab, m) {
  m.doc() = "Finite-volume chemotaxis solver with sub-logistic source";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<kslab::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<kslab::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<kslab::PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  m.def("canonical_config", [](const std::string& text) { return kslab::to_json(kslab::parse_config_text(text)).dump(); },
        "Validated, default-filled configuration as JSON text.");
  m.def("run", &run_config, py::arg("config"));
  m.def("simulate", [](const std::string& config, const std::string& dir) {
    const auto cfg = kslab::parse_config_text(config);
    py::gil_scoped_release release;
    return kslab::simulate_to_directory(cfg, dir).summary().dump();
  }, py::arg("config"), py::arg("out_dir"));
  m.def("sweep", [](const std::string& plan, const std::string& dir) {
    const auto p = kslab::parse_sweep_plan(json::parse(plan));
    py::gil_scoped_release release;
    return kslab::run_sweep(p, dir).to_json().dump();
  }, py::arg("plan"), py::arg("out_dir"));
  m.def("convergence", [](const std::string& config, int levels, const std::string& kind) {
    const auto cfg = kslab::parse_config_text(config);
    const auto k = kslab::convergence_kind_from_string(kind);
    py::gil_scoped_release release;
    return kslab::convergence_study(cfg, levels, k).to_json().dump();
  }, py::arg("config"), py::arg("levels"), py::arg("kind"));

  m.def("homogeneous_steady_state", [](double r, double mu, double p) {
    return kslab::homogeneous_steady_state(kslab::SourceSpec(r, mu, p));
  }, py::arg("r"), py::arg("mu"), py::arg("p"));
  m.def("source", [](double u, double r, double mu, double p) { return kslab::eval_f(kslab::SourceSpec(r, mu, p), u); },
        py::arg("u"), py::arg("r"), py::arg("mu"), py::arg("p"));

  m.def("energy_y", [](const std::string& config, const py::array_t<double>& u, const py::array_t<double>& v, double k) {
    const kslab::Grid g = grid_of(config);
    const kslab::State s(g, kslab::Field(g, flatten(u, g)), kslab::Field(g, flatten(v, g)));
    return kslab::energy_y(s, k);
  }, py::arg("config"), py::arg("u"), py::arg("v"), py::arg("k"));
  m.def("lq_norm", [](const std::string& config, const py::array_t<double>& u, double q) {
    const kslab::Grid g = grid_of(config);
    return kslab::lq_norm(kslab::Field(g, flatten(u, g)), g, q);
  }, py::arg("config"), py::arg("u"), py::arg("q"));

  m.def("check_sequence_lemma", [](const std::vector<double>& a, const std::vector<double>& b, double u1) {
    return kslab::check_sequence_lemma(a, b, u1).to_json().dump();
  }, py::arg("a"), py::arg("b"), py::arg("u1"));
  m.def("check_gn", [](int n, const std::string& kind, int count, std::uint64_t seed, double p, double q, double r,
                       double s) {
    const kslab::FieldEnsemble e{kslab::Grid::rectangle(1.0, 1.0, n, n), kslab::ensemble_kind_from_string(kind), count,
                                 seed};
    return kslab::check_gn(e, p, q, r, s).to_json().dump();
  }, py::arg("n"), py::arg("kind"), py::arg("count"), py::arg("seed"), py::arg("p"), py::arg("q"), py::arg("r"),
        py::arg("s"));
  m.def("check_eta_interpolation", [](int n, const std::string& kind, int count, std::uint64_t seed,
                                      const std::vector<double>& etas) {
    const kslab::FieldEnsemble e{kslab::Grid::rectangle(1.0, 1.0, n, n), kslab::ensemble_kind_from_string(kind), count,
                                 seed};
    return kslab::check_eta_interpolation(e, etas).to_json().dump();
  }, py::arg("n"), py::arg("kind"), py::arg("count"), py::arg("seed"), py::arg("etas"));
}
