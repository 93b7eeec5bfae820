#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qctol/circuit_json.hpp"
#include "qctol/dense_oracle.hpp"
#include "qctol/octahedron.hpp"
#include "qctol/thresholds.hpp"

namespace py = pybind11;
using namespace qctol;

namespace {

Circuit parse_circuit(const std::string& text) { return circuit_from_json(json::parse(text)); }

py::dict checks_dict(const std::vector<std::pair<std::string, double>>& checks) {
  py::dict d;
  for (const auto& [k, v] : checks) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qctol, m) {
  m.doc() = "Noise thresholds and pairing-list simulation of bi-entangling circuits";
  m.attr("__version__") = QCTOL_VERSION;

  py::register_exception<JsonSchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ShotError>(m, "ShotError", PyExc_RuntimeError);

  m.def(
      "cnot_depolarizing_threshold",
      [](double tol) {
        const CnotDepolarizingThreshold t = cnot_depolarizing_threshold(tol);
        const ThresholdCertificate c = cnot_depolarizing_certificate(t.p_high);
        py::dict d;
        d["p_star"] = t.p_star;
        d["p_low"] = t.p_low;
        d["p_high"] = t.p_high;
        d["certificate_valid"] = c.valid;
        d["checks"] = checks_dict(c.checks);
        return d;
      },
      py::arg("tol") = 1e-6);

  m.def(
      "split_threshold",
      [](const Matrix& u, const std::string& split, double tol) {
        const ThresholdCertificate c = split_threshold(u, split_kind_from_string(split), tol);
        py::dict d;
        d["p_star"] = c.p_star;
        d["tight"] = c.tight;
        d["valid"] = c.valid;
        d["checks"] = checks_dict(c.checks);
        return d;
      },
      py::arg("unitary"), py::arg("split"), py::arg("tol") = 1e-6);

  m.def(
      "clifford_threshold",
      [](double theta, const std::string& noise) {
        const PlaneThreshold t = plane_threshold(theta, noise_kind_from_string(noise));
        return py::make_tuple(t.p, py::make_tuple(t.noise_point.x, t.noise_point.y, t.noise_point.z));
      },
      py::arg("theta"), py::arg("noise") = "generic",
      "Minimal noise p and the optimal noise point for diag(1, e^{i theta}).");

  m.def(
      "ebits",
      [](const Matrix& u, const std::string& split) {
        return entanglement_entropy_pure(choi_vector_of_unitary(u), choi_labels(2),
                                         choi_split(split_kind_from_string(split)));
      },
      py::arg("unitary"), py::arg("split"));

  m.def("choi_of_unitary", [](const Matrix& u) { return choi_of_unitary(u).matrix(); }, py::arg("unitary"));
  m.def("noisy_cnot_choi", [](double p) { return noisy_cnot(p).choi().matrix(); }, py::arg("p"));

  m.def(
      "simulate",
      [](const std::string& circuit_json, std::int64_t shots, std::uint64_t seed, int threads) {
        const Circuit c = parse_circuit(circuit_json);
        py::gil_scoped_release release;
        return run(c, shots, seed, threads);
      },
      py::arg("circuit_json"), py::arg("shots"), py::arg("seed") = 0, py::arg("threads") = 0,
      "Counts of measured bitstrings from the pairing-list simulator.");

  m.def(
      "run_dense", [](const std::string& circuit_json) { return run_dense(parse_circuit(circuit_json)); },
      py::arg("circuit_json"), "Exact outcome distribution by density-matrix evolution (at most 8 qubits).");

  m.def(
      "compare",
      [](const Counts& counts, const Distribution& exact, double alpha) {
        const ComparisonReport r = compare(counts, exact, alpha);
        py::dict d;
        d["tv_distance"] = r.tv_distance;
        d["chi2"] = r.chi2;
        d["dof"] = r.dof;
        d["chi2_pvalue"] = r.chi2_pvalue;
        d["pass"] = r.pass;
        return d;
      },
      py::arg("counts"), py::arg("exact"), py::arg("alpha") = 0.001);

  m.def(
      "observation0",
      [](int circuits, std::uint64_t seed, int ancillas) {
        const Observation0Report r = observation0_check(ancillas, circuits, seed);
        py::dict d;
        d["circuits"] = r.circuits;
        d["escapes"] = r.escapes;
        d["non_vertex_outputs"] = r.non_vertex_outputs;
        d["max_deviation"] = r.max_deviation;
        d["pass"] = r.passed();
        return d;
      },
      py::arg("circuits") = 1000, py::arg("seed") = 7, py::arg("ancillas") = 2);
}
