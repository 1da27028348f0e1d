#pragma once

// Dense complex linear algebra and validated quantum objects.
//
// Every bipartite object uses the A-major ordering: basis index i * dimB + j
// corresponds to |i>_A |j>_B.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hdsteer {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Base class of all library errors.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// An input violates a precondition or an object invariant (shape, PSD, trace, ...).
class ValidationError : public Error {
   public:
    using Error::Error;
};

/// The requested computation is outside the supported scale or scope.
class UnsupportedError : public Error {
   public:
    using Error::Error;
};

/// Numerical tolerances used by the validating constructors. Every operation that
/// validates takes one of these, defaulting to the module constants below.
struct Tolerances {
    double hermitian = 1e-10;     // max |rho - rho^dagger| entry
    double psd = 1e-9;            // min eigenvalue >= -psd
    double trace = 1e-10;         // |Tr rho - 1|
    double completeness = 1e-9;   // max |sum_a M_a - I| entry
    double no_signaling = 1e-9;   // max entry spread of sum_a sigma_{a|x} across x
    double rank = 1e-8;           // eigenvalues above this count as support
};

inline constexpr Tolerances kDefaultTolerances{};

enum class Subsystem { A, B };

// ---------------------------------------------------------------------------
// Matrix predicates and helpers

double max_abs(const CMatrix& m);
bool all_finite(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol = kDefaultTolerances.hermitian);
/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const CMatrix& m);
bool is_psd(const CMatrix& m, double tol = kDefaultTolerances.psd);
bool is_unitary(const CMatrix& u, double tol = 1e-9);
CMatrix hermitian_part(const CMatrix& m);
/// Re Tr(A B).
double real_trace_product(const CMatrix& a, const CMatrix& b);
CMatrix basis_projector(std::size_t dim, std::size_t index);
CMatrix ket_bra(const CVector& ket, const CVector& bra);

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
struct HermitianEigen {
    RVector values;
    CMatrix vectors;
};
HermitianEigen hermitian_eigen(const CMatrix& m);

// ---------------------------------------------------------------------------
// Quantum objects

/// Unit-trace positive semidefinite matrix.
class DensityMatrix {
   public:
    explicit DensityMatrix(CMatrix matrix, const Tolerances& tol = kDefaultTolerances);

    static DensityMatrix maximally_mixed(std::size_t dim);
    static DensityMatrix pure(const CVector& ket);

    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    const CMatrix& matrix() const { return matrix_; }

   private:
    CMatrix matrix_;
};

/// A density matrix on A (x) B with explicit subsystem dimensions.
class BipartiteState {
   public:
    BipartiteState(std::size_t dim_a, std::size_t dim_b, DensityMatrix state);
    BipartiteState(std::size_t dim_a, std::size_t dim_b, CMatrix matrix,
                   const Tolerances& tol = kDefaultTolerances);

    std::size_t dim_a() const { return dim_a_; }
    std::size_t dim_b() const { return dim_b_; }
    const DensityMatrix& state() const { return state_; }
    const CMatrix& matrix() const { return state_.matrix(); }

   private:
    std::size_t dim_a_;
    std::size_t dim_b_;
    DensityMatrix state_;
};

/// One POVM: effects indexed by outcome.
using Povm = std::vector<CMatrix>;

/// Indexed family {M_{a|x}}: inputs x, each a POVM over outcomes a.
class MeasurementSet {
   public:
    explicit MeasurementSet(std::vector<Povm> inputs, const Tolerances& tol = kDefaultTolerances);

    std::size_t dim() const { return dim_; }
    std::size_t num_inputs() const { return inputs_.size(); }
    std::size_t num_outcomes(std::size_t x) const { return inputs_.at(x).size(); }
    const std::vector<Povm>& inputs() const { return inputs_; }
    const CMatrix& effect(std::size_t x, std::size_t a) const { return inputs_.at(x).at(a); }

   private:
    std::size_t dim_;
    std::vector<Povm> inputs_;
};

// ---------------------------------------------------------------------------
// Operations

/// Kronecker product A (x) B with the A-major convention.
CMatrix tensor(const CMatrix& a, const CMatrix& b);

/// Partial trace of an operator on dim_a * dim_b, keeping the named subsystem.
/// Works for any operator (not only states).
CMatrix partial_trace(const CMatrix& m, std::size_t dim_a, std::size_t dim_b, Subsystem keep);
DensityMatrix partial_trace(const BipartiteState& rho, Subsystem keep);

/// Partial transpose on subsystem B.
CMatrix partial_transpose_b(const CMatrix& m, std::size_t dim_a, std::size_t dim_b);

/// Hermitian PSD square root; eigenvalues below tol.psd are clamped to zero.
CMatrix psd_sqrt(const CMatrix& m, const Tolerances& tol = kDefaultTolerances);

struct PinvSqrt {
    CMatrix inverse_sqrt;  // pseudo-inverse square root on the support
    CMatrix support;       // orthogonal projector onto the support
};

/// Pseudo-inverse square root: eigenvalues above tol.rank are inverted, the rest zeroed.
PinvSqrt psd_pinv_sqrt(const CMatrix& m, const Tolerances& tol = kDefaultTolerances);

/// Transpose of m taken in the orthonormal basis formed by the columns of `basis`.
/// With basis = I this is the ordinary transpose.
CMatrix transpose_in_basis(const CMatrix& m, const CMatrix& basis, double unitary_tol = 1e-9);

/// Number of singular values above tol; by default tol = 1e-8 * largest singular value.
std::size_t rank_with_tol(const CMatrix& m);
std::size_t rank_with_tol(const CMatrix& m, double tol);

struct MubPair {
    std::vector<CVector> computational;
    std::vector<CVector> fourier;
};

/// Computational basis and the discrete Fourier basis <a|phi_b> = exp(2 pi i ab/d)/sqrt(d).
MubPair fourier_mub_pair(std::size_t d);

/// The maximally entangled vector |Phi+> = sum_i |ii>/sqrt(d).
CVector phi_plus(std::size_t d);

}  // namespace hdsteer
