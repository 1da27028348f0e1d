#pragma once

// Convex-weight quantifiers with respect to the level-1 free sets: LHS assemblages,
// jointly measurable measurement sets, and PPT states (a relaxation of separability that
// is exact for 2x2 and 2x3). Each weight is the optimum of a conic program routed
// through solve_conic and is returned together with its dual certificate.

#include <cstddef>
#include <vector>

#include "hdsteer/conic.hpp"
#include "hdsteer/qcore.hpp"
#include "hdsteer/steering.hpp"

namespace hdsteer {

/// All deterministic response functions a = strategy[x] for the given outcome counts.
class DeterministicStrategySet {
   public:
    explicit DeterministicStrategySet(std::vector<std::size_t> outcomes_per_input);

    std::size_t size() const { return strategies_.size(); }
    std::size_t num_inputs() const { return outcomes_.size(); }
    const std::vector<std::size_t>& outcomes() const { return outcomes_; }
    const std::vector<std::size_t>& strategy(std::size_t mu) const { return strategies_.at(mu); }
    /// D(a|x, mu) in {0, 1}.
    bool responds(std::size_t mu, std::size_t x, std::size_t a) const {
        return strategies_.at(mu).at(x) == a;
    }

   private:
    std::vector<std::size_t> outcomes_;
    std::vector<std::vector<std::size_t>> strategies_;
};

/// Affine functional S(obj) = offset - sum_{x,a} Re Tr(obj_{a|x} F_{a|x}).
///
/// S(obj) <= free_bound for every member of the free set, and S lower-bounds the weight
/// of any object of the same shape. On the input it reproduces the weight within the gap.
struct LinearCertificate {
    double offset = 1.0;
    std::vector<std::vector<CMatrix>> operators;
    double free_bound = 0.0;
    /// Extra operator of the certificate (the identity-multiplier W of the joint
    /// measurability dual); empty otherwise. Kept for audit only.
    CMatrix auxiliary;

    double evaluate(const std::vector<std::vector<CMatrix>>& object) const;
    double evaluate(const Assemblage& sigma) const;
    double evaluate(const MeasurementSet& measurements) const;
    double evaluate(const CMatrix& state) const;
};

struct WeightResult {
    double value = 0.0;  // clamped to [0, 1]
    /// Free component (normalized) and residual component, shaped like the input
    /// ([input][outcome], or [[rho]] for states). `residual` is empty when value ~ 0 and
    /// `free_part` is empty when value ~ 1.
    std::vector<std::vector<CMatrix>> free_part;
    std::vector<std::vector<CMatrix>> residual;
    /// Unnormalized free component, (1 - value) * free_part; always present.
    std::vector<std::vector<CMatrix>> free_unnormalized;
    LinearCertificate certificate;
    double certified_lower_bound = 0.0;  // certificate evaluated on the input
    double gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    /// false when the free set was relaxed (PPT beyond 2x2 / 2x3): the value is then a
    /// lower bound on the true weight.
    bool exact = true;
};

/// Weight of the non-LHS part of an assemblage. `level` must be 1.
WeightResult steering_weight(const Assemblage& sigma, std::size_t level = 1,
                             const SolverOptions& options = {});

/// Weight of the non-jointly-measurable part of a measurement set. `level` must be 1.
WeightResult incompatibility_weight(const MeasurementSet& measurements, std::size_t level = 1,
                                    const SolverOptions& options = {});

/// Weight of the non-PPT part of a bipartite state. `level` must be 1.
WeightResult entanglement_weight_ppt(const BipartiteState& rho, std::size_t level = 1,
                                     const SolverOptions& options = {});

struct WeightInequality {
    double lhs = 0.0;  // steering weight of steer(rho, M)
    double rhs = 0.0;  // incompatibility weight(M) * entanglement weight(rho)
    bool holds = false;
    WeightResult steering;
    WeightResult incompatibility;
    WeightResult entanglement;
};

/// Checks W_steer(steer(rho, M)) <= W_incomp(M) * W_ent(rho) with slack 1e-5. Only 2x2
/// and 2x3 states are accepted so that the entanglement weight is exact.
WeightInequality check_weight_inequality(const MeasurementSet& measurements,
                                         const BipartiteState& rho,
                                         const SolverOptions& options = {});

}  // namespace hdsteer
