#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "degenlab/error.hpp"
#include "degenlab/fields.hpp"
#include "degenlab/operators.hpp"
#include "degenlab/suites.hpp"
#include "degenlab/symmat.hpp"

namespace py = pybind11;
using namespace degenlab;

namespace {

SymMat from_rows(const std::vector<std::vector<double>>& rows) { return SymMat::from_rows(rows); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "degenlab core";

  static py::exception<Error> err(m, "DegenlabError", PyExc_ValueError);

  m.def("suite_names", &suite_names);
  m.def("builtin_names", &builtin_names);
  m.attr("schema_version") = kReportSchemaVersion;

  m.def(
      "run_suite_json",
      [](const std::string& name, double grid_h, std::uint64_t seed, double tol_scale, bool quick, int n, double alpha,
         const std::string& builtin, bool deterministic) {
        SuiteOptions o{grid_h, seed, tol_scale, quick, n, alpha, builtin};
        std::vector<CheckReport> rs;
        {
          py::gil_scoped_release release;
          rs = run_suite(name, o);
        }
        std::vector<std::string> out;
        for (const auto& r : rs) out.push_back(r.to_json(deterministic).dump());
        return py::make_tuple(out, suite_exit_code(rs));
      },
      py::arg("name"), py::arg("grid_h") = 0.0, py::arg("seed") = 1, py::arg("tol_scale") = 1.0,
      py::arg("quick") = false, py::arg("n") = 0, py::arg("alpha") = -1.0, py::arg("builtin") = "",
      py::arg("deterministic") = true);

  m.def("eigenvalues", [](const std::vector<std::vector<double>>& rows) { return eigenvalues(from_rows(rows)); });
  m.def("partial_sum", [](const std::vector<std::vector<double>>& rows, int k) { return partial_sum(from_rows(rows), k); });
  m.def("pucci_plus", [](const std::vector<std::vector<double>>& rows, double a) { return pucci_plus(from_rows(rows), a); });
  m.def("pucci_root", &pucci_root);
  m.def("pucci_example_residual", &pucci_example_residual);
  m.def("example1_residual", [](const Vec& x, int l) { return example1_residual(x, l); });

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(err.ptr(), e.what());
    }
  });
}
