#pragma once

// Quantum channels in Kraus form, the generalized channel-state duality with an
// arbitrary full-rank marginal, and one-sided n-PEB / n-PIB certification.
//
// Duality convention: a Choi state lives on A (x) B with A = channel output and
// B = channel input, and Tr_A rho = sigma. A Kraus operator K corresponds to the
// vector psi with psi[i * dim_in + j] = (K * conj(sigma)^{1/2})_{ij}, so that
//   Lambda_rho(Y) = sum_l K_l Y K_l^dagger,  K_l = sqrt(p_l) F_l^T conj(sigma)^{-1/2},
// where F_l^T is psi_l reshaped row-major. For real sigma (e.g. I/d) conj(sigma) = sigma.

#include <cstddef>
#include <vector>

#include "hdsteer/qcore.hpp"

namespace hdsteer {

/// Completely positive trace-preserving map Y -> sum_l K_l Y K_l^dagger.
class KrausChannel {
   public:
    KrausChannel(std::size_t dim_in, std::size_t dim_out, std::vector<CMatrix> kraus,
                 double completeness_tol = 1e-9);

    static KrausChannel identity(std::size_t d);

    std::size_t dim_in() const { return dim_in_; }
    std::size_t dim_out() const { return dim_out_; }
    const std::vector<CMatrix>& kraus() const { return kraus_; }

   private:
    std::size_t dim_in_;
    std::size_t dim_out_;
    std::vector<CMatrix> kraus_;
};

/// Lambda(rho) = eta rho + (1 - eta) I/d.
KrausChannel depolarizing(std::size_t d, double visibility);

/// Schrodinger picture on a state.
DensityMatrix apply(const KrausChannel& channel, const DensityMatrix& rho);
/// Schrodinger picture on an arbitrary operator (linear extension).
CMatrix apply_operator(const KrausChannel& channel, const CMatrix& y);
/// Heisenberg picture on an arbitrary operator: sum_l K_l^dagger N K_l.
CMatrix dual_apply_operator(const KrausChannel& channel, const CMatrix& n);

/// Heisenberg picture on a measurement set defined on the output space.
MeasurementSet dual_apply(const KrausChannel& channel, const MeasurementSet& measurements);

/// (Lambda (x) id) applied to the first factor of a bipartite operator on in (x) other.
CMatrix apply_on_first(const KrausChannel& channel, const CMatrix& m, std::size_t dim_other);

/// Entrywise complex conjugate channel, Kraus K -> conj(K). Transposition commutes with
/// the Heisenberg picture through it: dual_apply(conj, N^T) = dual_apply(channel, N)^T.
/// Kraus ranks are unchanged, so any n-PEB certificate carries over.
KrausChannel conjugate_channel(const KrausChannel& channel);

/// Entrywise transpose of every effect (the transpose map in the computational basis).
MeasurementSet transpose_measurements(const MeasurementSet& measurements);

struct ChoiState {
    std::size_t dim_out;  // subsystem A
    std::size_t dim_in;   // subsystem B
    CMatrix state;        // PSD, unit trace, on dim_out * dim_in
    CMatrix marginal;     // sigma = Tr_A state

    BipartiteState bipartite() const;
};

/// Choi state with marginal sigma; requires sigma full rank on the input space.
ChoiState choi_of(const KrausChannel& channel, const DensityMatrix& sigma,
                  const Tolerances& tol = kDefaultTolerances);

/// Channel reconstructed from a state whose B-marginal equals sigma (within 1e-8).
/// Kraus operators come from the eigendecomposition of rho.
KrausChannel state_to_channel(const BipartiteState& rho, const DensityMatrix& sigma,
                              const Tolerances& tol = kDefaultTolerances);

/// One weighted pure term of an explicit decomposition rho = sum_l p_l |psi_l><psi_l|.
struct PureTerm {
    double weight;
    CVector vector;  // normalized internally
};

/// Kraus operator built from one pure term: sqrt(p) F^T conj(sigma)^{-1/2}.
CMatrix kraus_from_pure_term(const PureTerm& term, std::size_t dim_out, std::size_t dim_in,
                             const DensityMatrix& sigma, const Tolerances& tol = kDefaultTolerances);

struct PebCertificate {
    std::size_t n = 0;
    std::vector<std::size_t> kraus_ranks;
    std::size_t max_rank = 0;
};

/// Ranks of the given Kraus operators; max rank n certifies the channel is n-PEB.
PebCertificate peb_certificate(const KrausChannel& channel);

/// Certificate from a Choi state supplied with an explicit pure-state decomposition.
/// The decomposition must reproduce rho within 1e-9.
PebCertificate peb_certificate(const BipartiteState& rho, const DensityMatrix& sigma,
                               const std::vector<PureTerm>& decomposition,
                               const Tolerances& tol = kDefaultTolerances);

struct PibCheck {
    bool refuted = false;  // true certifies the channel is not n-PIB
    double witness_value = 0.0;
    double bound = 0.0;
};

/// Steers the MUB witness measurements on choi_of(channel, sigma) and compares with the
/// n-preparable bound. `false` is inconclusive.
PibCheck pib_witness_check(const KrausChannel& channel, const DensityMatrix& sigma, std::size_t n,
                           double tol = 1e-9);

}  // namespace hdsteer
