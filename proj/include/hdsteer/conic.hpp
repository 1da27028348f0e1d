#pragma once

// Small dense semidefinite programs over complex Hermitian blocks.
//
// A ConicProblem is stated in linear-matrix-inequality form over real variables y:
//
//     maximize    b^T y
//     subject to  C_k - sum_i y_i A_{i,k}  >= 0   (PSD, one Hermitian block per k)
//                 E y = f
//
// Its conic dual is
//
//     minimize    sum_k Re Tr(C_k X_k) + f^T w
//     subject to  sum_k Re Tr(A_{i,k} X_k) + (E^T w)_i = b_i,   X_k >= 0.
//
// solve_conic runs an infeasible primal-dual interior-point method (HKM direction,
// Mehrotra predictor-corrector) and returns both sides, so every optimal value comes
// with a certificate. Single-threaded and deterministic.

#include <cstddef>
#include <string>
#include <vector>

#include "hdsteer/qcore.hpp"

namespace hdsteer {

struct SparseEntry {
    Eigen::Index row;
    Eigen::Index col;
    Complex value;
};

/// Coefficient matrix of one variable inside one block. The assembled matrix must be
/// Hermitian.
struct BlockTerm {
    std::size_t var;
    std::vector<SparseEntry> entries;
};

struct LmiBlock {
    std::size_t dim = 0;
    CMatrix constant;  // C_k
    std::vector<BlockTerm> terms;
};

struct LinearEquality {
    std::vector<std::pair<std::size_t, double>> coefficients;
    double rhs = 0.0;
};

struct ConicProblem {
    std::size_t num_vars = 0;
    RVector objective;  // b, maximized
    std::vector<LmiBlock> blocks;
    std::vector<LinearEquality> equalities;

    /// Appends a block with the given constant term; returns its index.
    std::size_t add_block(CMatrix constant);
    /// Adds `scale * entries` to the coefficient of variable `var` in block `block`.
    void add_term(std::size_t block, std::size_t var, const std::vector<SparseEntry>& entries,
                  double scale = 1.0);
    /// Throws ValidationError on inconsistent shapes or non-Hermitian data.
    void validate() const;
};

/// A d x d Hermitian matrix stored as d^2 consecutive real variables starting at
/// `offset`: diagonal entries first, then (Re, Im) pairs of the strict upper triangle.
struct HermitianParam {
    std::size_t offset = 0;
    std::size_t dim = 0;

    std::size_t count() const { return dim * dim; }
    /// Sparse Hermitian basis matrix of local parameter p.
    std::vector<SparseEntry> basis(std::size_t p) const;
    /// Whether local parameter p lies on the diagonal (so Tr B_p = 1, else 0).
    bool is_diagonal(std::size_t p) const { return p < dim; }
    CMatrix assemble(const RVector& y) const;
};

/// Shifts every entry into a sub-block (for variables embedded in a larger block).
std::vector<SparseEntry> shifted(std::vector<SparseEntry> entries, Eigen::Index row_offset,
                                 Eigen::Index col_offset);

enum class SolverStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string to_string(SolverStatus status);

struct SolverOptions {
    double gap_tol = 1e-10;        // relative duality gap
    double feasibility_tol = 1e-10;
    int max_iterations = 150;
    // Contract thresholds: a run that stops early is still accepted if it meets these.
    double accept_gap = 1e-6;
    double accept_residual = 1e-7;
};

struct ConicSolution {
    SolverStatus status = SolverStatus::NumericalFailure;
    RVector y;                         // maximization variables
    std::vector<CMatrix> slack;        // C_k - sum_i y_i A_{i,k}, recomputed from y
    std::vector<CMatrix> multipliers;  // X_k, the dual certificate
    RVector equality_multipliers;      // w
    double primal_value = 0.0;         // b^T y
    double dual_value = 0.0;           // sum Re Tr(C X) + f^T w
    double gap = 0.0;                  // |dual_value - primal_value|
    double primal_residual = 0.0;      // max(LMI violation of slack, |E y - f|_inf)
    double dual_residual = 0.0;        // |b - A(X) - E^T w|_inf
    int iterations = 0;
};

/// Raised on infeasibility, unboundedness, or failure to reach the contract thresholds.
class SolverError : public Error {
   public:
    SolverError(const std::string& what, ConicSolution last);
    const ConicSolution& last_iterate() const { return last_; }

   private:
    ConicSolution last_;
};

ConicSolution solve_conic(const ConicProblem& problem, const SolverOptions& options = {});

}  // namespace hdsteer
