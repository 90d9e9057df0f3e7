#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsdc/runner.hpp"

namespace py = pybind11;

namespace {

std::vector<std::vector<qsdc::cplx>> matrix_rows(const qsdc::Unitary& u) {
    std::vector<std::vector<qsdc::cplx>> rows(u.dim);
    for (int r = 0; r < u.dim; ++r)
        for (int c = 0; c < u.dim; ++c) rows[r].push_back(u.at(r, c));
    return rows;
}

}  // namespace

PYBIND11_MODULE(_qsdcnet, m) {
    m.doc() = "d-dimensional QSDC network simulator core";

    m.def("bell_state",
          [](int n, int mm, int d) { return qsdc::make_bell_state(n, mm, d).amps; },
          py::arg("n"), py::arg("m"), py::arg("d"),
          "amplitudes of |Psi_nm> in row-major (j_A*d + j_B) order");
    m.def("pauli_unitary",
          [](int n, int mm, int d) { return matrix_rows(qsdc::pauli_unitary(n, mm, d)); },
          py::arg("n"), py::arg("m"), py::arg("d"));
    m.def("hadamard_matrix",
          [](int d) { return matrix_rows(qsdc::hadamard_matrix(d)); }, py::arg("d"));
    m.def("builtin_basis_set",
          [](int d, int M) {
              auto set = qsdc::builtin_basis_set(d, M);
              std::vector<std::vector<std::vector<qsdc::cplx>>> out;
              for (const auto& b : set.bases) {
                  std::vector<std::vector<qsdc::cplx>> vecs;
                  for (const auto& v : b.vectors) vecs.push_back(v.amps);
                  out.push_back(std::move(vecs));
              }
              return out;
          },
          py::arg("d"), py::arg("m"));

    m.def("theoretical_eve_error_rate", &qsdc::stats::theoretical_eve_error_rate,
          py::arg("d"), py::arg("m"));
    m.def("detection_probability", &qsdc::stats::detection_probability,
          py::arg("epsilon"), py::arg("n_samples"));

    m.def("run_report_json",
          [](const std::string& config_json, int parallel) {
              auto config = qsdc::parse_run_config(nlohmann::json::parse(config_json));
              return qsdc::cmd_run(config, parallel).json.dump();
          },
          py::arg("config_json"), py::arg("parallel") = 1,
          "run trials from a JSON config string; returns the report as JSON");
    m.def("sweep_csv",
          [](const std::string& config_json, const std::string& sweep_json, int parallel) {
              auto config = qsdc::parse_run_config(nlohmann::json::parse(config_json));
              return qsdc::cmd_sweep(config, nlohmann::json::parse(sweep_json), parallel);
          },
          py::arg("config_json"), py::arg("sweep_json") = "{}", py::arg("parallel") = 1);
    m.def("verify", []() {
        std::string listing;
        bool ok = qsdc::cmd_verify(listing);
        return py::make_tuple(ok, listing);
    });
}
