#pragma once

// The steering map and the correspondence between assemblages and measurement sets.

#include <cstddef>
#include <vector>

#include "hdsteer/qcore.hpp"

namespace hdsteer {

/// Family {sigma_{a|x}} of subnormalized states with an input-independent marginal.
class Assemblage {
   public:
    explicit Assemblage(std::vector<std::vector<CMatrix>> inputs,
                        const Tolerances& tol = kDefaultTolerances);

    std::size_t dim() const { return dim_; }
    std::size_t num_inputs() const { return inputs_.size(); }
    std::size_t num_outcomes(std::size_t x) const { return inputs_.at(x).size(); }
    const std::vector<std::vector<CMatrix>>& inputs() const { return inputs_; }
    const CMatrix& element(std::size_t x, std::size_t a) const { return inputs_.at(x).at(a); }

    /// rho_B = sum_a sigma_{a|0}.
    CMatrix marginal() const;

   private:
    std::size_t dim_;
    std::vector<std::vector<CMatrix>> inputs_;
};

/// Finite sample of the white-noise PVM family {eta U|a><a|U^dagger + (1-eta) I/d}.
struct NoisyPvmFamily {
    std::size_t dim;
    double visibility;
    std::vector<CMatrix> unitaries;

    /// One d-outcome input per unitary.
    MeasurementSet members() const;
};

/// sigma_{a|x} = Tr_A[(M_{a|x} (x) 1) rho_AB].
Assemblage steer(const BipartiteState& rho, const MeasurementSet& measurements);

/// Result of mapping an assemblage to measurements.
///
/// When the marginal is full rank `measurements` live on the original space and
/// `support` is the identity. Otherwise they are expressed in the orthonormal
/// eigenbasis of the support, `support` is the d x r isometry onto it, and
/// `restricted_marginal` is the (diagonal, full-rank) marginal on that subspace.
struct MeasurementMap {
    MeasurementSet measurements;
    DensityMatrix marginal;
    CMatrix support;
    DensityMatrix restricted_marginal;

    bool full_rank() const { return support.cols() == support.rows(); }
};

/// M_{a|x} = rho_B^{-1/2} sigma_{a|x} rho_B^{-1/2}, restricted to the support of rho_B.
MeasurementMap assemblage_to_measurements(const Assemblage& sigma,
                                          const Tolerances& tol = kDefaultTolerances);

/// sigma_{a|x} = rho_B^{1/2} M_{a|x} rho_B^{1/2}. Throws if rho_B is rank deficient.
Assemblage measurements_to_assemblage(const MeasurementSet& measurements,
                                      const DensityMatrix& marginal,
                                      const Tolerances& tol = kDefaultTolerances);

/// Inverse of assemblage_to_measurements, lifting back through the support isometry.
Assemblage measurements_to_assemblage(const MeasurementMap& map,
                                      const Tolerances& tol = kDefaultTolerances);

/// eta M_{a|x} + (1 - eta) (Tr M_{a|x} / d) I. For rank-1 PVMs the identity share is I/d.
MeasurementSet add_white_noise(const MeasurementSet& measurements, double visibility);

/// eta |Phi+><Phi+| + (1 - eta) I/d^2 on d x d.
BipartiteState isotropic(std::size_t d, double visibility);

/// Two projective measurements: computational basis and Fourier basis, with white
/// noise of the given visibility.
MeasurementSet fourier_mub_measurements(std::size_t d, double visibility = 1.0);

/// Projective measurement onto the columns of a unitary.
Povm pvm_from_unitary(const CMatrix& unitary);

}  // namespace hdsteer
