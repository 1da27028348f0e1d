#pragma once

// JSON and CSV encodings of the library objects.
//
// Matrix literal: {"rows": r, "cols": c, "data": [[re, im], ...]} in row-major order.
// Assemblage / MeasurementSet: {"dim": d, "inputs": [[matrix, ...], ...]}.
// Channel: {"dim_in": d, "dim_out": d, "kraus": [matrix, ...]}.
// State: {"dim_a": da, "dim_b": db, "matrix": matrix}.
//
// Scalar report values are rounded to 9 significant digits. Matrix entries are written
// at full precision so that a report can be read back and pass validation. Output
// is byte-identical for identical inputs.

#include <string>
#include <vector>

#include <json.hpp>

#include "hdsteer/channels.hpp"
#include "hdsteer/qcore.hpp"
#include "hdsteer/quantifiers.hpp"
#include "hdsteer/steering.hpp"
#include "hdsteer/witnesses.hpp"

namespace hdsteer::io {

using Json = nlohmann::json;

/// Malformed document (wrong type, missing key, ragged data).
class ParseError : public Error {
   public:
    using Error::Error;
};

/// x rounded to 9 significant digits (non-finite values pass through).
double round9(double x);
/// printf("%.9g") of x.
std::string format9(double x);

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);

Json family_to_json(std::size_t dim, const std::vector<std::vector<CMatrix>>& family);
std::vector<std::vector<CMatrix>> family_from_json(const Json& j, std::size_t* dim = nullptr);

Json to_json(const Assemblage& sigma);
Json to_json(const MeasurementSet& measurements);
Json to_json(const BipartiteState& rho);
Json to_json(const KrausChannel& channel);
Json to_json(const WeightResult& result);
Json to_json(const CertificationResult& result);
Json to_json(const ThresholdReport& report);
Json to_json(const PebCertificate& cert);
Json to_json(const PibCheck& check);

/// Parsers throw ParseError on shape problems and ValidationError on invariant violations.
Assemblage assemblage_from_json(const Json& j);
MeasurementSet measurements_from_json(const Json& j);
BipartiteState state_from_json(const Json& j);
KrausChannel channel_from_json(const Json& j);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

/// "n,iso_sn_threshold,pvm_nsim_threshold" followed by one row per level.
std::string region_csv(const std::vector<RegionRow>& rows);

}  // namespace hdsteer::io
