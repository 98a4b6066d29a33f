#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fast/errors.hpp"
#include "fast/fast.hpp"
#include "fast/harness.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fermionic correlation estimation (C++ core)";

  py::register_exception<fast::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<fast::CapacityError>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<fast::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<fast::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<fast::DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<fast::ContractError>(m, "ContractError", PyExc_RuntimeError);

  py::enum_<fast::MappingKind>(m, "MappingKind")
      .value("JW", fast::MappingKind::JW)
      .value("BK", fast::MappingKind::BK)
      .value("TT", fast::MappingKind::TT);

  py::class_<fast::PauliString>(m, "PauliString")
      .def(py::init(&fast::PauliString::parse), py::arg("text"))
      .def_property_readonly("qubits", &fast::PauliString::qubits)
      .def_property_readonly("weight", &fast::PauliString::weight)
      .def("commutes", [](const fast::PauliString& a, const fast::PauliString& b) { return fast::commutes(a, b); })
      .def("__mul__", [](const fast::PauliString& a, const fast::PauliString& b) { return a * b; })
      .def("__eq__", [](const fast::PauliString& a, const fast::PauliString& b) { return a == b; })
      .def("__str__", &fast::PauliString::to_string)
      .def("__repr__", [](const fast::PauliString& p) { return "PauliString('" + p.to_string() + "')"; });

  m.def("majoranas", [](unsigned n, const std::string& mapping) {
    const auto basis = fast::majorana_basis(n, fast::parse_mapping(mapping));
    std::vector<std::string> out;
    for (const auto& g : basis.gammas) out.push_back(g.to_string());
    return out;
  }, py::arg("n"), py::arg("mapping") = "jw");

  m.def("choose_regime", [](unsigned n, double eps, const std::string& mapping, const std::string& kind) {
    const auto c = fast::choose_regime(n, eps, fast::parse_mapping(mapping), fast::parse_kind(kind));
    return py::make_tuple(fast::to_string(c.regime), fast::to_string(c.strategy));
  }, py::arg("n"), py::arg("eps"), py::arg("mapping"), py::arg("kind"));

  m.def("majority_select", [](std::uint64_t n_plus, std::uint64_t n_minus) {
    const auto s = fast::majority_select(n_plus, n_minus);
    py::dict d;
    d["chosen"] = fast::to_string(s.chosen);
    d["retained"] = s.retained();
    d["c_plus_sq"] = s.c_plus_sq_hat;
    d["c_minus_sq"] = s.c_minus_sq_hat;
    return d;
  }, py::arg("n_plus"), py::arg("n_minus"));

  m.def("run_config", [](const std::string& text, std::size_t max_workers) {
    auto cfg = fast::parse_config(text);
    cfg.max_workers = max_workers;
    fast::ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = fast::run_experiment(cfg);
    }
    return py::make_tuple(fast::to_csv(r), fast::to_json(r), fast::report_text(r), r.passed());
  }, py::arg("config_json"), py::arg("max_workers") = 0,
        "Runs an experiment config; returns (csv, json, report, passed).");

  m.def("oracle_config", [](const std::string& text) {
    const auto cfg = fast::parse_config(text);
    return fast::oracle_csv(
        fast::oracle_correlations(cfg.model, cfg.mapping, cfg.kind, cfg.targets, cfg.times));
  }, py::arg("config_json"));

  m.def("scaling_config", [](const std::string& text) {
    const auto report = fast::scaling_study(fast::parse_scaling_config(text));
    return py::make_tuple(fast::scaling_csv(report), fast::scaling_table(report), report.passed());
  }, py::arg("sweep_json"));
}
