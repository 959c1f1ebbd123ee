#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "eulerlab/config.hpp"
#include "eulerlab/errors.hpp"
#include "eulerlab/experiment.hpp"
#include "eulerlab/grid_solver.hpp"
#include "eulerlab/measures.hpp"
#include "eulerlab/mode_set.hpp"
#include "eulerlab/spectral.hpp"

namespace py = pybind11;
using namespace eulerlab;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

SpectralState to_state(int truncation, const ComplexArray& amps) {
  auto modes = build_mode_set(truncation);
  if (amps.ndim() != 1 || static_cast<std::size_t>(amps.shape(0)) != modes->size()) {
    throw InvalidArgument("expected " + std::to_string(modes->size()) + " amplitudes for truncation " +
                          std::to_string(truncation));
  }
  return SpectralState(modes, std::vector<Complex>(amps.data(), amps.data() + amps.shape(0)));
}

ComplexArray from_state(const SpectralState& s) {
  ComplexArray out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(s.size())});
  std::copy(s.amps().begin(), s.amps().end(), out.mutable_data());
  return out;
}

GridField to_field(const RealArray& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw InvalidArgument("expected a square 2D array");
  const int n = static_cast<int>(a.shape(0));
  return GridField(n, std::vector<double>(a.data(), a.data() + a.size()));
}

RealArray from_field(const GridField& f) {
  RealArray out(std::vector<py::ssize_t>{f.n(), f.n()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

MeasureKind measure_kind(const std::string& name) {
  if (name == "enstrophy") return MeasureKind::enstrophy_gaussian;
  if (name == "energy") return MeasureKind::energy_gaussian;
  throw InvalidArgument("measure must be \"enstrophy\" or \"energy\"");
}

}  // namespace

PYBIND11_MODULE(_eulerlab, m) {
  m.doc() = "Spectral and grid solvers for the stochastic 2D Euler equation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("modes", [](int truncation) {
    const auto set = build_mode_set(truncation);
    std::vector<std::pair<int, int>> out;
    for (const auto& k : set->modes()) out.emplace_back(k.k1, k.k2);
    return out;
  }, py::arg("truncation"), "Retained half-lattice modes, in storage order.");

  m.def("euler_drift", [](int n, const ComplexArray& a) { return from_state(euler_drift(to_state(n, a))); },
        py::arg("truncation"), py::arg("amplitudes"));
  m.def("energy", [](int n, const ComplexArray& a) { return energy(to_state(n, a)); });
  m.def("enstrophy", [](int n, const ComplexArray& a) { return enstrophy(to_state(n, a)); });
  m.def("drift_divergence", [](int n, const ComplexArray& a) { return drift_divergence(to_state(n, a)); });
  m.def("im6_residual", [](int n, const ComplexArray& a, const std::string& measure) {
    const auto s = to_state(n, a);
    return im6_residual(make_measure(measure_kind(measure), s.mode_set()), euler_drift, s);
  }, py::arg("truncation"), py::arg("amplitudes"), py::arg("measure") = "enstrophy");
  m.def("sp4_residual", [](int n, const ComplexArray& a, const std::string& measure) {
    const auto s = to_state(n, a);
    const auto ou = ou_family(measure, *s.mode_set());
    return sp4_residual(make_measure(measure_kind(measure), s.mode_set()), ou, s);
  }, py::arg("truncation"), py::arg("amplitudes"), py::arg("measure") = "enstrophy");

  m.def("laplacian", [](const RealArray& f) { return from_field(laplacian_apply(to_field(f))); });
  m.def("poisson_invert", [](const RealArray& f) { return from_field(poisson_invert(to_field(f))); });
  m.def("advection", [](const RealArray& psi, const RealArray& omega) {
    return from_field(advection_apply(to_field(psi), to_field(omega)));
  });
  m.def("cayley_step", [](const RealArray& omega, double dt) { return from_field(cayley_step(to_field(omega), dt)); },
        py::arg("omega"), py::arg("dt"));
  m.def("cellular_mode", [](int n, int k1, int k2, double amp) { return from_field(cellular_mode(n, k1, k2, amp)); });
  m.def("shell_spectrum", [](const RealArray& psi) {
    const auto s = shell_spectrum(to_field(psi));
    py::dict d;
    d["shell_energy"] = s.shell_energy;
    d["total_energy"] = s.total_energy;
    d["lowest_shell_fraction"] = s.lowest_shell_fraction;
    return d;
  });

  m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        py::arg("text"), "Validate a JSON config and return it with every default filled in.");
  m.def("run_experiment", [](const std::string& text, py::object output) {
    auto cfg = parse_config(text);
    if (!output.is_none()) cfg.output = py::str(output);
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run_experiment(cfg);
    }
    py::dict d;
    d["command"] = std::string(command_name(s.command));
    d["seed"] = s.seed;
    py::dict metrics;
    for (const auto& [k, v] : s.metrics) metrics[py::str(k)] = v;
    d["metrics"] = metrics;
    std::vector<std::string> files;
    for (const auto& f : s.files) files.push_back(f.string());
    d["files"] = files;
    d["line"] = s.line();
    return d;
  }, py::arg("config"), py::arg("output") = py::none());
}
