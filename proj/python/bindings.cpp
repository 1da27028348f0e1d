// Python module hdsteer._core. Matrices cross the boundary as complex numpy arrays;
// assemblages and measurement sets as nested lists [input][outcome].

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hdsteer/channels.hpp"
#include "hdsteer/conic.hpp"
#include "hdsteer/quantifiers.hpp"
#include "hdsteer/steering.hpp"
#include "hdsteer/witnesses.hpp"

namespace py = pybind11;
using namespace hdsteer;

namespace {

using Family = std::vector<std::vector<CMatrix>>;

py::dict weight_dict(const WeightResult& r) {
    py::dict d;
    d["value"] = r.value;
    d["free_part"] = r.free_part;
    d["residual"] = r.residual;
    d["certificate_offset"] = r.certificate.offset;
    d["certificate_operators"] = r.certificate.operators;
    d["certificate_free_bound"] = r.certificate.free_bound;
    d["certified_lower_bound"] = r.certified_lower_bound;
    d["gap"] = r.gap;
    d["iterations"] = r.iterations;
    d["exact"] = r.exact;
    return d;
}

BipartiteState state(const CMatrix& rho, std::size_t dim_a, std::size_t dim_b) {
    return BipartiteState(dim_a, dim_b, rho);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Steering-dimension witnesses, maps and convex-weight quantifiers";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
    py::register_exception<UnsupportedError>(m, "UnsupportedError", error.ptr());
    py::register_exception<SolverError>(m, "SolverError", error.ptr());

    m.def("isotropic", [](std::size_t d, double eta) { return isotropic(d, eta).matrix(); }, py::arg("d"),
          py::arg("eta"));
    m.def("fourier_mub_measurements", [](std::size_t d, double eta) { return fourier_mub_measurements(d, eta).inputs(); },
          py::arg("d"), py::arg("eta") = 1.0);
    m.def(
        "steer",
        [](const CMatrix& rho, std::size_t dim_a, std::size_t dim_b, const Family& measurements) {
            return steer(state(rho, dim_a, dim_b), MeasurementSet(measurements)).inputs();
        },
        py::arg("rho"), py::arg("dim_a"), py::arg("dim_b"), py::arg("measurements"));

    m.def(
        "assemblage_to_measurements",
        [](const Family& sigma) {
            const MeasurementMap map = assemblage_to_measurements(Assemblage(sigma));
            py::dict d;
            d["measurements"] = map.measurements.inputs();
            d["marginal"] = map.marginal.matrix();
            d["support"] = map.support;
            d["full_rank"] = map.full_rank();
            return d;
        },
        py::arg("assemblage"));
    m.def(
        "measurements_to_assemblage",
        [](const Family& measurements, const CMatrix& marginal) {
            return measurements_to_assemblage(MeasurementSet(measurements), DensityMatrix(marginal)).inputs();
        },
        py::arg("measurements"), py::arg("marginal"));

    m.def("witness_value", [](const Family& sigma) {
        const Assemblage a(sigma);
        return witness_value(a, ghds_witness(a.dim()));
    }, py::arg("assemblage"));
    m.def("witness_bound", &witness_bound, py::arg("d"), py::arg("n"));
    m.def(
        "certify",
        [](const Family& sigma, double tol) {
            const CertificationResult r = certify(Assemblage(sigma), tol);
            py::dict d;
            d["witness_value"] = r.witness_value;
            d["violated_levels"] = r.violated_levels;
            d["not_simulable"] = r.not_simulable;
            d["certified_sn"] = r.certified_sn;
            return d;
        },
        py::arg("assemblage"), py::arg("tol") = 1e-9);
    m.def("pvm_nsim_threshold", &pvm_nsim_threshold, py::arg("d"), py::arg("n"));
    m.def("iso_sn_threshold", &iso_sn_threshold, py::arg("d"), py::arg("n"));
    m.def("mub_nsim_threshold", &mub_nsim_threshold, py::arg("d"), py::arg("n"));
    m.def(
        "region_table",
        [](std::size_t d) {
            std::vector<std::tuple<std::size_t, double, double>> rows;
            for (const auto& r : region_table(d)) rows.emplace_back(r.n, r.iso_sn_threshold, r.pvm_nsim_threshold);
            return rows;
        },
        py::arg("d"));

    m.def("steering_weight", [](const Family& sigma) { return weight_dict(steering_weight(Assemblage(sigma))); },
          py::arg("assemblage"));
    m.def(
        "incompatibility_weight",
        [](const Family& measurements) { return weight_dict(incompatibility_weight(MeasurementSet(measurements))); },
        py::arg("measurements"));
    m.def(
        "entanglement_weight_ppt",
        [](const CMatrix& rho, std::size_t dim_a, std::size_t dim_b) {
            return weight_dict(entanglement_weight_ppt(state(rho, dim_a, dim_b)));
        },
        py::arg("rho"), py::arg("dim_a"), py::arg("dim_b"));

    m.def("depolarizing_kraus", [](std::size_t d, double eta) { return depolarizing(d, eta).kraus(); },
          py::arg("d"), py::arg("eta"));
    m.def(
        "choi_of",
        [](const std::vector<CMatrix>& kraus, const CMatrix& marginal) {
            if (kraus.empty()) throw ValidationError("at least one Kraus operator is required");
            const KrausChannel ch(static_cast<std::size_t>(kraus[0].cols()), static_cast<std::size_t>(kraus[0].rows()),
                                  kraus);
            return choi_of(ch, DensityMatrix(marginal)).state;
        },
        py::arg("kraus"), py::arg("marginal"));
    m.def(
        "state_to_channel",
        [](const CMatrix& rho, std::size_t dim_out, std::size_t dim_in, const CMatrix& marginal) {
            return state_to_channel(state(rho, dim_out, dim_in), DensityMatrix(marginal)).kraus();
        },
        py::arg("rho"), py::arg("dim_out"), py::arg("dim_in"), py::arg("marginal"));
}
