#include "hdsteer/channels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdsteer/steering.hpp"
#include "hdsteer/witnesses.hpp"

namespace hdsteer {

namespace {

void check_marginal(const DensityMatrix& sigma, std::size_t dim, const Tolerances& tol) {
    if (sigma.dim() != dim)
        throw ValidationError("marginal has dimension " + std::to_string(sigma.dim()) +
                              ", channel input has " + std::to_string(dim));
    if (min_eigenvalue(sigma.matrix()) <= tol.rank)
        throw ValidationError("channel-state duality needs a full-rank marginal");
}

// conj(sigma)^{power} for power = +1/2 or -1/2 on a full-rank sigma.
CMatrix conj_root(const DensityMatrix& sigma, bool inverse, const Tolerances& tol) {
    const CMatrix conj = sigma.matrix().conjugate();
    return inverse ? psd_pinv_sqrt(conj, tol).inverse_sqrt : psd_sqrt(conj, tol);
}

}  // namespace

KrausChannel::KrausChannel(std::size_t dim_in, std::size_t dim_out, std::vector<CMatrix> kraus,
                           double completeness_tol)
    : dim_in_(dim_in), dim_out_(dim_out), kraus_(std::move(kraus)) {
    if (dim_in == 0 || dim_out == 0) throw ValidationError("channel dimensions must be positive");
    if (kraus_.empty()) throw ValidationError("channel needs at least one Kraus operator");
    CMatrix sum = CMatrix::Zero(dim_in, dim_in);
    for (const auto& k : kraus_) {
        if (static_cast<std::size_t>(k.rows()) != dim_out ||
            static_cast<std::size_t>(k.cols()) != dim_in)
            throw ValidationError("Kraus operator has shape " + std::to_string(k.rows()) + "x" +
                                  std::to_string(k.cols()) + ", expected " +
                                  std::to_string(dim_out) + "x" + std::to_string(dim_in));
        if (!all_finite(k)) throw ValidationError("Kraus operator has non-finite entries");
        sum += k.adjoint() * k;
    }
    if (max_abs(sum - CMatrix::Identity(dim_in, dim_in)) > completeness_tol)
        throw ValidationError("Kraus operators are not trace preserving");
}

KrausChannel KrausChannel::identity(std::size_t d) {
    return KrausChannel(d, d, {CMatrix::Identity(d, d)});
}

KrausChannel depolarizing(std::size_t d, double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw ValidationError("visibility must lie in [0, 1]");
    if (d == 0) throw ValidationError("dimension must be positive");
    std::vector<CMatrix> kraus;
    if (visibility > 0.0) kraus.push_back(std::sqrt(visibility) * CMatrix::Identity(d, d));
    if (visibility < 1.0) {
        const double scale = std::sqrt((1.0 - visibility) / static_cast<double>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                CMatrix k = CMatrix::Zero(d, d);
                k(i, j) = scale;
                kraus.push_back(std::move(k));
            }
    }
    return KrausChannel(d, d, std::move(kraus));
}

CMatrix apply_operator(const KrausChannel& channel, const CMatrix& y) {
    if (static_cast<std::size_t>(y.rows()) != channel.dim_in() || y.rows() != y.cols())
        throw ValidationError("apply: operator does not match the channel input dimension");
    CMatrix out = CMatrix::Zero(channel.dim_out(), channel.dim_out());
    for (const auto& k : channel.kraus()) out += k * y * k.adjoint();
    return out;
}

DensityMatrix apply(const KrausChannel& channel, const DensityMatrix& rho) {
    return DensityMatrix(hermitian_part(apply_operator(channel, rho.matrix())));
}

CMatrix dual_apply_operator(const KrausChannel& channel, const CMatrix& n) {
    if (static_cast<std::size_t>(n.rows()) != channel.dim_out() || n.rows() != n.cols())
        throw ValidationError("dual_apply: operator does not match the channel output dimension");
    CMatrix out = CMatrix::Zero(channel.dim_in(), channel.dim_in());
    for (const auto& k : channel.kraus()) out += k.adjoint() * n * k;
    return out;
}

MeasurementSet dual_apply(const KrausChannel& channel, const MeasurementSet& measurements) {
    std::vector<Povm> inputs;
    for (const auto& povm : measurements.inputs()) {
        Povm mapped;
        for (const auto& e : povm) mapped.push_back(hermitian_part(dual_apply_operator(channel, e)));
        inputs.push_back(std::move(mapped));
    }
    return MeasurementSet(std::move(inputs));
}

CMatrix apply_on_first(const KrausChannel& channel, const CMatrix& m, std::size_t dim_other) {
    const auto n_in = static_cast<Eigen::Index>(channel.dim_in() * dim_other);
    if (m.rows() != n_in || m.cols() != n_in)
        throw ValidationError("apply_on_first: operator dimension mismatch");
    const CMatrix id = CMatrix::Identity(dim_other, dim_other);
    const auto n_out = static_cast<Eigen::Index>(channel.dim_out() * dim_other);
    CMatrix out = CMatrix::Zero(n_out, n_out);
    for (const auto& k : channel.kraus()) {
        const CMatrix big = tensor(k, id);
        out += big * m * big.adjoint();
    }
    return out;
}

KrausChannel conjugate_channel(const KrausChannel& channel) {
    std::vector<CMatrix> kraus;
    for (const auto& k : channel.kraus()) kraus.push_back(k.conjugate());
    return KrausChannel(channel.dim_in(), channel.dim_out(), std::move(kraus));
}

MeasurementSet transpose_measurements(const MeasurementSet& measurements) {
    std::vector<Povm> inputs;
    for (const auto& povm : measurements.inputs()) {
        Povm t;
        for (const auto& e : povm) t.push_back(e.transpose());
        inputs.push_back(std::move(t));
    }
    return MeasurementSet(std::move(inputs));
}

BipartiteState ChoiState::bipartite() const {
    return BipartiteState(dim_out, dim_in, DensityMatrix(state));
}

ChoiState choi_of(const KrausChannel& channel, const DensityMatrix& sigma, const Tolerances& tol) {
    check_marginal(sigma, channel.dim_in(), tol);
    const CMatrix root = conj_root(sigma, false, tol);
    const auto dout = static_cast<Eigen::Index>(channel.dim_out());
    const auto din = static_cast<Eigen::Index>(channel.dim_in());
    CMatrix state = CMatrix::Zero(dout * din, dout * din);
    for (const auto& k : channel.kraus()) {
        const CMatrix a = k * root;
        CVector psi(dout * din);
        for (Eigen::Index i = 0; i < dout; ++i)
            for (Eigen::Index j = 0; j < din; ++j) psi(i * din + j) = a(i, j);
        state += psi * psi.adjoint();
    }
    state = hermitian_part(state);
    CMatrix marginal = partial_trace(state, channel.dim_out(), channel.dim_in(), Subsystem::B);
    return {channel.dim_out(), channel.dim_in(), std::move(state), std::move(marginal)};
}

CMatrix kraus_from_pure_term(const PureTerm& term, std::size_t dim_out, std::size_t dim_in,
                             const DensityMatrix& sigma, const Tolerances& tol) {
    check_marginal(sigma, dim_in, tol);
    const auto dout = static_cast<Eigen::Index>(dim_out);
    const auto din = static_cast<Eigen::Index>(dim_in);
    if (term.vector.size() != dout * din)
        throw ValidationError("pure term has the wrong dimension");
    if (term.weight < 0.0) throw ValidationError("pure term weight is negative");
    const double norm = term.vector.norm();
    if (norm == 0.0) throw ValidationError("pure term vector is zero");
    CMatrix f_transpose(dout, din);
    for (Eigen::Index i = 0; i < dout; ++i)
        for (Eigen::Index j = 0; j < din; ++j) f_transpose(i, j) = term.vector(i * din + j) / norm;
    return std::sqrt(term.weight) * f_transpose * conj_root(sigma, true, tol);
}

KrausChannel state_to_channel(const BipartiteState& rho, const DensityMatrix& sigma,
                              const Tolerances& tol) {
    check_marginal(sigma, rho.dim_b(), tol);
    const CMatrix marginal = partial_trace(rho.matrix(), rho.dim_a(), rho.dim_b(), Subsystem::B);
    if (max_abs(marginal - sigma.matrix()) > 1e-8)
        throw ValidationError("state_to_channel: Tr_A rho does not match the supplied marginal");
    const auto eig = hermitian_eigen(rho.matrix());
    std::vector<CMatrix> kraus;
    // Descending eigenvalue order so the dominant term comes first.
    for (Eigen::Index l = eig.values.size() - 1; l >= 0; --l) {
        if (eig.values(l) <= tol.psd) continue;
        kraus.push_back(kraus_from_pure_term({eig.values(l), eig.vectors.col(l)}, rho.dim_a(),
                                             rho.dim_b(), sigma, tol));
    }
    return KrausChannel(rho.dim_b(), rho.dim_a(), std::move(kraus), 1e-8);
}

PebCertificate peb_certificate(const KrausChannel& channel) {
    PebCertificate cert;
    for (const auto& k : channel.kraus()) {
        const std::size_t r = rank_with_tol(k);
        if (r == 0) continue;
        cert.kraus_ranks.push_back(r);
        cert.max_rank = std::max(cert.max_rank, r);
    }
    cert.n = cert.max_rank;
    return cert;
}

PebCertificate peb_certificate(const BipartiteState& rho, const DensityMatrix& sigma,
                               const std::vector<PureTerm>& decomposition, const Tolerances& tol) {
    CMatrix rebuilt = CMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
    std::vector<CMatrix> kraus;
    for (const auto& term : decomposition) {
        const CVector v = term.vector / term.vector.norm();
        rebuilt += term.weight * v * v.adjoint();
        kraus.push_back(kraus_from_pure_term(term, rho.dim_a(), rho.dim_b(), sigma, tol));
    }
    if (max_abs(rebuilt - rho.matrix()) > 1e-9)
        throw ValidationError("decomposition does not reproduce the state");
    return peb_certificate(KrausChannel(rho.dim_b(), rho.dim_a(), std::move(kraus), 1e-8));
}

PibCheck pib_witness_check(const KrausChannel& channel, const DensityMatrix& sigma, std::size_t n,
                           double tol) {
    if (channel.dim_in() != channel.dim_out())
        throw ValidationError("pib_witness_check needs a channel with equal input and output dimension");
    const std::size_t d = channel.dim_in();
    const ChoiState choi = choi_of(channel, sigma);
    const Assemblage assemblage = steer(choi.bipartite(), fourier_mub_measurements(d));
    PibCheck check;
    check.witness_value = witness_value(assemblage, ghds_witness(d));
    check.bound = witness_bound(d, n);
    check.refuted = check.witness_value > check.bound + tol;
    return check;
}

}  // namespace hdsteer
