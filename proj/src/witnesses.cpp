#include "hdsteer/witnesses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hdsteer {

namespace {

void check_level(std::size_t d, std::size_t n) {
    if (d < 2) throw ValidationError("dimension must be at least 2");
    if (n < 1 || n > d)
        throw ValidationError("level n=" + std::to_string(n) + " outside 1.." + std::to_string(d));
}

double sqrt_of(std::size_t v) { return std::sqrt(static_cast<double>(v)); }

}  // namespace

double GhdsWitness::normalization() const { return 1.0 + 1.0 / sqrt_of(dim); }

GhdsWitness ghds_witness(std::size_t d) {
    const MubPair mubs = fourier_mub_pair(d);
    GhdsWitness w{d, std::vector<std::vector<CMatrix>>(2)};
    for (std::size_t a = 0; a < d; ++a) {
        w.operators[0].push_back(ket_bra(mubs.computational[a], mubs.computational[a]));
        w.operators[1].push_back(ket_bra(mubs.fourier[a], mubs.fourier[a]).transpose());
    }
    return w;
}

double witness_value(const Assemblage& sigma, const GhdsWitness& witness) {
    if (sigma.dim() != witness.dim || sigma.num_inputs() != witness.operators.size())
        throw ValidationError("witness expects 2 inputs on dimension " +
                              std::to_string(witness.dim));
    double value = 0.0;
    for (std::size_t x = 0; x < witness.operators.size(); ++x) {
        if (sigma.num_outcomes(x) != witness.operators[x].size())
            throw ValidationError("witness expects " + std::to_string(witness.dim) +
                                  " outcomes per input");
        for (std::size_t a = 0; a < witness.operators[x].size(); ++a)
            value += real_trace_product(sigma.element(x, a), witness.operators[x][a]);
    }
    return value;
}

double witness_bound(std::size_t d, std::size_t n) {
    check_level(d, n);
    const double rn = sqrt_of(n);
    return (1.0 + 1.0 / sqrt_of(d)) * ((rn - 1.0) / (rn + 1.0) + 1.0);
}

CertificationResult certify(const Assemblage& sigma, double tol) {
    const GhdsWitness w = ghds_witness(sigma.dim());
    CertificationResult result;
    result.witness_value = witness_value(sigma, w);
    for (std::size_t n = 1; n < sigma.dim(); ++n) {
        if (result.witness_value > witness_bound(sigma.dim(), n) + tol) {
            result.violated_levels.push_back(n);
            result.not_simulable = n;
        }
    }
    result.certified_sn = result.not_simulable == 0 ? 0 : result.not_simulable + 1;
    return result;
}

double pvm_nsim_threshold(std::size_t d, std::size_t n) {
    check_level(d, n);
    const double dd = static_cast<double>(d);
    return (dd * std::sqrt(static_cast<double>(n + 1) / (dd + 1.0)) - 1.0) / (dd - 1.0);
}

double iso_sn_threshold(std::size_t d, std::size_t n) {
    check_level(d, n);
    const double dd = static_cast<double>(d);
    return (dd * static_cast<double>(n) - 1.0) / (dd * dd - 1.0);
}

double mub_nsim_threshold(std::size_t d, std::size_t n) {
    check_level(d, n);
    const double dd = static_cast<double>(d);
    const double rn = sqrt_of(n);
    return ((dd + std::sqrt(dd) - 1.0) * rn - 1.0) / ((dd - 1.0) * (rn + 1.0));
}

ThresholdReport threshold_report(std::size_t d, std::size_t n) {
    return {d,
            n,
            pvm_nsim_threshold(d, n),
            iso_sn_threshold(d, n),
            mub_nsim_threshold(d, n),
            witness_bound(d, n)};
}

std::size_t sn_lower_bound_from_fraction(const BipartiteState& rho, double tol) {
    if (rho.dim_a() != rho.dim_b())
        throw ValidationError("entangled fraction needs equal local dimensions");
    const std::size_t d = rho.dim_a();
    const CVector phi = phi_plus(d);
    const double fraction = (phi.adjoint() * rho.matrix() * phi)(0, 0).real();
    const double scaled = fraction * static_cast<double>(d);
    const auto n = static_cast<long>(std::ceil(scaled - tol));
    return static_cast<std::size_t>(std::clamp<long>(n, 1, static_cast<long>(d)));
}

std::vector<RegionRow> region_table(std::size_t d) {
    if (d < 2) throw ValidationError("region table needs d >= 2");
    std::vector<RegionRow> rows;
    for (std::size_t n = 1; n < d; ++n)
        rows.push_back({n, iso_sn_threshold(d, n), pvm_nsim_threshold(d, n)});
    return rows;
}

}  // namespace hdsteer
