#pragma once

// Dimension witnesses for steering assemblages and the closed-form visibility thresholds
// that bound Schmidt number and n-simulability.

#include <cstddef>
#include <vector>

#include "hdsteer/qcore.hpp"
#include "hdsteer/steering.hpp"

namespace hdsteer {

/// Two-input witness built from the computational basis and the transposed Fourier basis:
/// W_{a|0} = |a><a|, W_{b|1} = |phi_b><phi_b|^T.
struct GhdsWitness {
    std::size_t dim;
    std::vector<std::vector<CMatrix>> operators;  // [input][outcome]
    /// N = 1 + 1/sqrt(d)
    double normalization() const;
};

GhdsWitness ghds_witness(std::size_t d);

/// sum_{a,x} Tr[sigma_{a|x} W_{a|x}].
double witness_value(const Assemblage& sigma, const GhdsWitness& witness);

/// Largest value reachable by n-preparable assemblages: N ((sqrt(n)-1)/(sqrt(n)+1) + 1).
double witness_bound(std::size_t d, std::size_t n);

struct CertificationResult {
    double witness_value = 0.0;
    std::vector<std::size_t> violated_levels;  // every n < d whose bound is exceeded
    /// Largest violated n; 0 when nothing is violated.
    std::size_t not_simulable = 0;
    /// not_simulable + 1 when a violation occurred, otherwise 0 (no claim).
    std::size_t certified_sn = 0;
};

/// Compares the witness value with the bound for every level n = 1..d-1. A level is
/// violated only when value > bound + tol; equality counts as preparable.
CertificationResult certify(const Assemblage& sigma, double tol = 1e-9);

/// Visibility up to which the whole noisy PVM family in dimension d is n-simulable.
double pvm_nsim_threshold(std::size_t d, std::size_t n);
/// Visibility above which the isotropic state has Schmidt number at least n + 1.
double iso_sn_threshold(std::size_t d, std::size_t n);
/// Visibility above which a noisy MUB pair is certified not n-simulable by the witness.
double mub_nsim_threshold(std::size_t d, std::size_t n);

struct ThresholdReport {
    std::size_t d;
    std::size_t n;
    double pvm_nsim;
    double iso_sn;
    double mub_nsim;
    double witness_bound;
};

ThresholdReport threshold_report(std::size_t d, std::size_t n);

/// Lower bound "SN >= n" from the entangled fraction F = <Phi+|rho|Phi+>: the smallest n
/// with F <= n/d.
std::size_t sn_lower_bound_from_fraction(const BipartiteState& rho, double tol = 1e-12);

struct RegionRow {
    std::size_t n;
    double iso_sn_threshold;
    double pvm_nsim_threshold;
};

/// Rows n = 1..d-1 of the isotropic-state region diagram.
std::vector<RegionRow> region_table(std::size_t d);

}  // namespace hdsteer
