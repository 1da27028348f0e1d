#include "hdsteer/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace hdsteer::io {

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.is_object()) throw ParseError(std::string("expected an object with key \"") + key + "\"");
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing key \"") + key + "\"");
    return *it;
}

std::size_t require_size(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ParseError(std::string("\"") + key + "\" must be a non-negative integer");
    return v.get<std::size_t>();
}

double require_number(const Json& v) {
    if (!v.is_number()) throw ParseError("expected a number");
    return v.get<double>();
}

Json number(double x) { return Json(round9(x)); }

// Matrix payloads keep every bit so that reports can be fed back as inputs.
Json exact(double x) { return Json(x == 0.0 ? 0.0 : x); }

Json size_list(const std::vector<std::size_t>& v) {
    Json out = Json::array();
    for (const auto x : v) out.push_back(x);
    return out;
}

}  // namespace

double round9(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(format9(x).c_str(), nullptr);
}

std::string format9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x == 0.0 ? 0.0 : x);  // no "-0"
    return buf;
}

Json matrix_to_json(const CMatrix& m) {
    Json data = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            data.push_back(Json::array({exact(m(r, c).real()), exact(m(r, c).imag())}));
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const Json& j) {
    const std::size_t rows = require_size(j, "rows");
    const std::size_t cols = require_size(j, "cols");
    const Json& data = require(j, "data");
    if (!data.is_array() || data.size() != rows * cols)
        throw ParseError("matrix \"data\" must hold rows * cols entries");
    CMatrix m(rows, cols);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const Json& e = data[k];
        if (!e.is_array() || e.size() != 2) throw ParseError("matrix entries must be [re, im] pairs");
        m(static_cast<Eigen::Index>(k / cols), static_cast<Eigen::Index>(k % cols)) =
            Complex(require_number(e[0]), require_number(e[1]));
    }
    return m;
}

Json family_to_json(std::size_t dim, const std::vector<std::vector<CMatrix>>& family) {
    Json inputs = Json::array();
    for (const auto& input : family) {
        Json row = Json::array();
        for (const auto& e : input) row.push_back(matrix_to_json(e));
        inputs.push_back(std::move(row));
    }
    return Json{{"dim", dim}, {"inputs", std::move(inputs)}};
}

std::vector<std::vector<CMatrix>> family_from_json(const Json& j, std::size_t* dim) {
    const std::size_t d = require_size(j, "dim");
    const Json& inputs = require(j, "inputs");
    if (!inputs.is_array()) throw ParseError("\"inputs\" must be an array");
    std::vector<std::vector<CMatrix>> family;
    for (const auto& input : inputs) {
        if (!input.is_array()) throw ParseError("each input must be an array of matrices");
        std::vector<CMatrix> row;
        for (const auto& e : input) {
            CMatrix m = matrix_from_json(e);
            if (static_cast<std::size_t>(m.rows()) != d || static_cast<std::size_t>(m.cols()) != d)
                throw ParseError("matrix shape does not match \"dim\"");
            row.push_back(std::move(m));
        }
        family.push_back(std::move(row));
    }
    if (dim) *dim = d;
    return family;
}

Json to_json(const Assemblage& sigma) { return family_to_json(sigma.dim(), sigma.inputs()); }

Json to_json(const MeasurementSet& measurements) {
    return family_to_json(measurements.dim(), measurements.inputs());
}

Json to_json(const BipartiteState& rho) {
    return Json{{"dim_a", rho.dim_a()}, {"dim_b", rho.dim_b()}, {"matrix", matrix_to_json(rho.matrix())}};
}

Json to_json(const KrausChannel& channel) {
    Json kraus = Json::array();
    for (const auto& k : channel.kraus()) kraus.push_back(matrix_to_json(k));
    return Json{{"dim_in", channel.dim_in()}, {"dim_out", channel.dim_out()}, {"kraus", std::move(kraus)}};
}

Json to_json(const WeightResult& result) {
    const auto family = [](const std::vector<std::vector<CMatrix>>& f) {
        const std::size_t dim = f.empty() || f[0].empty() ? 0 : static_cast<std::size_t>(f[0][0].rows());
        return f.empty() ? Json(nullptr) : family_to_json(dim, f);
    };
    Json cert{{"offset", number(result.certificate.offset)},
              {"free_bound", number(result.certificate.free_bound)},
              {"operators", family(result.certificate.operators)}};
    if (result.certificate.auxiliary.size() > 0)
        cert["auxiliary"] = matrix_to_json(result.certificate.auxiliary);
    return Json{{"value", number(result.value)},
                {"exact", result.exact},
                {"certified_lower_bound", number(result.certified_lower_bound)},
                {"gap", number(result.gap)},
                {"primal_residual", number(result.primal_residual)},
                {"dual_residual", number(result.dual_residual)},
                {"iterations", result.iterations},
                {"free_part", family(result.free_part)},
                {"residual", family(result.residual)},
                {"certificate", std::move(cert)}};
}

Json to_json(const CertificationResult& result) {
    return Json{{"witness_value", number(result.witness_value)},
                {"violated_levels", size_list(result.violated_levels)},
                {"certified_sn", result.certified_sn},
                {"not_simulable", result.not_simulable}};
}

Json to_json(const ThresholdReport& report) {
    return Json{{"d", report.d},
                {"n", report.n},
                {"pvm_nsim_threshold", number(report.pvm_nsim)},
                {"iso_sn_threshold", number(report.iso_sn)},
                {"mub_nsim_threshold", number(report.mub_nsim)},
                {"witness_bound", number(report.witness_bound)}};
}

Json to_json(const PebCertificate& cert) {
    return Json{{"n", cert.n}, {"kraus_ranks", size_list(cert.kraus_ranks)}, {"max_rank", cert.max_rank}};
}

Json to_json(const PibCheck& check) {
    return Json{{"refuted", check.refuted},
                {"witness_value", number(check.witness_value)},
                {"bound", number(check.bound)}};
}

Assemblage assemblage_from_json(const Json& j) { return Assemblage(family_from_json(j)); }

MeasurementSet measurements_from_json(const Json& j) { return MeasurementSet(family_from_json(j)); }

BipartiteState state_from_json(const Json& j) {
    const std::size_t da = require_size(j, "dim_a");
    const std::size_t db = require_size(j, "dim_b");
    return BipartiteState(da, db, matrix_from_json(require(j, "matrix")));
}

KrausChannel channel_from_json(const Json& j) {
    const std::size_t din = require_size(j, "dim_in");
    const std::size_t dout = require_size(j, "dim_out");
    const Json& kraus = require(j, "kraus");
    if (!kraus.is_array()) throw ParseError("\"kraus\" must be an array of matrices");
    std::vector<CMatrix> ops;
    for (const auto& k : kraus) ops.push_back(matrix_from_json(k));
    return KrausChannel(din, dout, std::move(ops));
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string region_csv(const std::vector<RegionRow>& rows) {
    std::ostringstream out;
    out << "n,iso_sn_threshold,pvm_nsim_threshold\n";
    for (const auto& r : rows)
        out << r.n << ',' << format9(r.iso_sn_threshold) << ',' << format9(r.pvm_nsim_threshold) << '\n';
    return out.str();
}

}  // namespace hdsteer::io
