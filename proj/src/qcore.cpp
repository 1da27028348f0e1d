#include "hdsteer/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hdsteer {

namespace {

std::string dims_string(const CMatrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

// Hermiticity is judged relative to the matrix scale so that unnormalized operators
// (inverse square roots, Kraus products) are not rejected for rounding noise.
double scaled(double tol, const CMatrix& m) { return tol * std::max(1.0, max_abs(m)); }

}  // namespace

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool all_finite(const CMatrix& m) {
    return m.real().allFinite() && m.imag().allFinite();
}

bool is_hermitian(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= scaled(tol, m);
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

HermitianEigen hermitian_eigen(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

bool is_psd(const CMatrix& m, double tol) {
    return is_hermitian(m) && min_eigenvalue(m) >= -tol;
}

bool is_unitary(const CMatrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    const auto n = u.rows();
    return max_abs(u.adjoint() * u - CMatrix::Identity(n, n)) <= tol;
}

double real_trace_product(const CMatrix& a, const CMatrix& b) {
    // Tr(AB) = sum_ij A_ij B_ji
    return (a.transpose().cwiseProduct(b)).sum().real();
}

CMatrix basis_projector(std::size_t dim, std::size_t index) {
    CMatrix p = CMatrix::Zero(dim, dim);
    p(index, index) = 1.0;
    return p;
}

CMatrix ket_bra(const CVector& ket, const CVector& bra) { return ket * bra.adjoint(); }

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix matrix, const Tolerances& tol) : matrix_(std::move(matrix)) {
    if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols())
        throw ValidationError("density matrix must be square and non-empty, got " +
                              dims_string(matrix_));
    if (!all_finite(matrix_)) throw ValidationError("density matrix has non-finite entries");
    if (!is_hermitian(matrix_, tol.hermitian))
        throw ValidationError("density matrix is not Hermitian");
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > tol.trace)
        throw ValidationError("density matrix trace is " + std::to_string(tr) + ", expected 1");
    if (min_eigenvalue(matrix_) < -tol.psd)
        throw ValidationError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    if (dim == 0) throw ValidationError("dimension must be positive");
    return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const CVector& ket) {
    const double norm = ket.norm();
    if (norm == 0.0) throw ValidationError("zero vector is not a state");
    const CVector v = ket / norm;
    return DensityMatrix(ket_bra(v, v));
}

BipartiteState::BipartiteState(std::size_t dim_a, std::size_t dim_b, DensityMatrix state)
    : dim_a_(dim_a), dim_b_(dim_b), state_(std::move(state)) {
    if (dim_a == 0 || dim_b == 0 || state_.dim() != dim_a * dim_b)
        throw ValidationError("bipartite state of dimension " + std::to_string(state_.dim()) +
                              " does not factor as " + std::to_string(dim_a) + "x" +
                              std::to_string(dim_b));
}

BipartiteState::BipartiteState(std::size_t dim_a, std::size_t dim_b, CMatrix matrix,
                               const Tolerances& tol)
    : BipartiteState(dim_a, dim_b, DensityMatrix(std::move(matrix), tol)) {}

MeasurementSet::MeasurementSet(std::vector<Povm> inputs, const Tolerances& tol)
    : dim_(0), inputs_(std::move(inputs)) {
    if (inputs_.empty()) throw ValidationError("measurement set needs at least one input");
    for (std::size_t x = 0; x < inputs_.size(); ++x) {
        const Povm& povm = inputs_[x];
        if (povm.empty())
            throw ValidationError("input " + std::to_string(x) + " has no outcomes");
        if (x == 0) dim_ = static_cast<std::size_t>(povm.front().rows());
        if (dim_ == 0) throw ValidationError("effects must be non-empty matrices");
        CMatrix sum = CMatrix::Zero(dim_, dim_);
        for (std::size_t a = 0; a < povm.size(); ++a) {
            const CMatrix& e = povm[a];
            if (static_cast<std::size_t>(e.rows()) != dim_ ||
                static_cast<std::size_t>(e.cols()) != dim_)
                throw ValidationError("effect (" + std::to_string(a) + "|" + std::to_string(x) +
                                      ") has shape " + dims_string(e));
            if (!all_finite(e)) throw ValidationError("effect has non-finite entries");
            if (!is_hermitian(e, tol.hermitian) || min_eigenvalue(e) < -tol.psd)
                throw ValidationError("effect (" + std::to_string(a) + "|" + std::to_string(x) +
                                      ") is not positive semidefinite");
            sum += e;
        }
        if (max_abs(sum - CMatrix::Identity(dim_, dim_)) > tol.completeness)
            throw ValidationError("effects of input " + std::to_string(x) +
                                  " do not sum to the identity");
    }
}

// ---------------------------------------------------------------------------

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix partial_trace(const CMatrix& m, std::size_t dim_a, std::size_t dim_b, Subsystem keep) {
    const auto n = static_cast<Eigen::Index>(dim_a * dim_b);
    if (m.rows() != n || m.cols() != n)
        throw ValidationError("partial trace: operator is " + dims_string(m) + ", expected " +
                              std::to_string(n) + "x" + std::to_string(n));
    const auto da = static_cast<Eigen::Index>(dim_a);
    const auto db = static_cast<Eigen::Index>(dim_b);
    if (keep == Subsystem::A) {
        CMatrix out = CMatrix::Zero(da, da);
        for (Eigen::Index i = 0; i < da; ++i)
            for (Eigen::Index k = 0; k < da; ++k)
                for (Eigen::Index j = 0; j < db; ++j) out(i, k) += m(i * db + j, k * db + j);
        return out;
    }
    CMatrix out = CMatrix::Zero(db, db);
    for (Eigen::Index i = 0; i < da; ++i) out += m.block(i * db, i * db, db, db);
    return out;
}

DensityMatrix partial_trace(const BipartiteState& rho, Subsystem keep) {
    return DensityMatrix(partial_trace(rho.matrix(), rho.dim_a(), rho.dim_b(), keep));
}

CMatrix partial_transpose_b(const CMatrix& m, std::size_t dim_a, std::size_t dim_b) {
    const auto n = static_cast<Eigen::Index>(dim_a * dim_b);
    if (m.rows() != n || m.cols() != n)
        throw ValidationError("partial transpose: operator is " + dims_string(m));
    const auto da = static_cast<Eigen::Index>(dim_a);
    const auto db = static_cast<Eigen::Index>(dim_b);
    CMatrix out(n, n);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index k = 0; k < da; ++k)
            out.block(i * db, k * db, db, db) = m.block(i * db, k * db, db, db).transpose();
    return out;
}

CMatrix psd_sqrt(const CMatrix& m, const Tolerances& tol) {
    if (!is_hermitian(m, tol.hermitian)) throw ValidationError("psd_sqrt: input is not Hermitian");
    const auto eig = hermitian_eigen(m);
    if (eig.values.size() > 0 && eig.values(0) < -tol.psd)
        throw ValidationError("psd_sqrt: input is not positive semidefinite");
    RVector root = eig.values.unaryExpr([&](double v) { return v < tol.psd ? 0.0 : std::sqrt(v); });
    return eig.vectors * root.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

PinvSqrt psd_pinv_sqrt(const CMatrix& m, const Tolerances& tol) {
    const auto eig = hermitian_eigen(m);
    const auto n = eig.values.size();
    RVector inv(n);
    RVector proj(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool on_support = eig.values(i) > tol.rank;
        inv(i) = on_support ? 1.0 / std::sqrt(eig.values(i)) : 0.0;
        proj(i) = on_support ? 1.0 : 0.0;
    }
    const CMatrix& v = eig.vectors;
    return {v * inv.cast<Complex>().asDiagonal() * v.adjoint(),
            v * proj.cast<Complex>().asDiagonal() * v.adjoint()};
}

CMatrix transpose_in_basis(const CMatrix& m, const CMatrix& basis, double unitary_tol) {
    if (!is_unitary(basis, unitary_tol))
        throw ValidationError("transpose_in_basis: basis is not unitary");
    if (basis.rows() != m.rows() || m.rows() != m.cols())
        throw ValidationError("transpose_in_basis: shape mismatch");
    const CMatrix coords = basis.adjoint() * m * basis;
    return basis * coords.transpose() * basis.adjoint();
}

std::size_t rank_with_tol(const CMatrix& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    return rank_with_tol(m, 1e-8 * s(0));
}

std::size_t rank_with_tol(const CMatrix& m, double tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    return static_cast<std::size_t>((s.array() > tol).count());
}

MubPair fourier_mub_pair(std::size_t d) {
    if (d < 2) throw ValidationError("fourier_mub_pair needs d >= 2");
    MubPair pair;
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t b = 0; b < d; ++b) {
        CVector e = CVector::Zero(d);
        e(b) = 1.0;
        pair.computational.push_back(e);
        CVector f(d);
        for (std::size_t a = 0; a < d; ++a) {
            // Reduce ab mod d before scaling so the phase is exact for large products.
            const double phase = 2.0 * std::numbers::pi * static_cast<double>((a * b) % d) /
                                 static_cast<double>(d);
            f(a) = std::polar(norm, phase);
        }
        pair.fourier.push_back(f);
    }
    return pair;
}

CVector phi_plus(std::size_t d) {
    CVector v = CVector::Zero(d * d);
    for (std::size_t i = 0; i < d; ++i) v(i * d + i) = 1.0;
    return v / std::sqrt(static_cast<double>(d));
}

}  // namespace hdsteer
