#include "hdsteer/steering.hpp"

#include <cmath>
#include <string>

namespace hdsteer {

namespace {

void check_visibility(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ValidationError("visibility must lie in [0, 1], got " + std::to_string(eta));
}

}  // namespace

Assemblage::Assemblage(std::vector<std::vector<CMatrix>> inputs, const Tolerances& tol)
    : dim_(0), inputs_(std::move(inputs)) {
    if (inputs_.empty()) throw ValidationError("assemblage needs at least one input");
    CMatrix reference;
    for (std::size_t x = 0; x < inputs_.size(); ++x) {
        const auto& family = inputs_[x];
        if (family.empty()) throw ValidationError("assemblage input has no outcomes");
        if (x == 0) dim_ = static_cast<std::size_t>(family.front().rows());
        if (dim_ == 0) throw ValidationError("assemblage elements must be non-empty");
        CMatrix sum = CMatrix::Zero(dim_, dim_);
        for (std::size_t a = 0; a < family.size(); ++a) {
            const CMatrix& s = family[a];
            if (static_cast<std::size_t>(s.rows()) != dim_ ||
                static_cast<std::size_t>(s.cols()) != dim_)
                throw ValidationError("assemblage element shape mismatch");
            if (!all_finite(s)) throw ValidationError("assemblage element has non-finite entries");
            if (!is_hermitian(s, tol.hermitian) || min_eigenvalue(s) < -tol.psd)
                throw ValidationError("assemblage element (" + std::to_string(a) + "|" +
                                      std::to_string(x) + ") is not positive semidefinite");
            sum += s;
        }
        if (std::abs(sum.trace().real() - 1.0) > tol.no_signaling)
            throw ValidationError("assemblage input " + std::to_string(x) +
                                  " does not have unit total trace");
        if (x == 0) {
            reference = sum;
        } else if (max_abs(sum - reference) > tol.no_signaling) {
            throw ValidationError("assemblage violates no-signaling at input " + std::to_string(x));
        }
    }
}

CMatrix Assemblage::marginal() const {
    CMatrix sum = CMatrix::Zero(dim_, dim_);
    for (const auto& s : inputs_.front()) sum += s;
    return sum;
}

MeasurementSet NoisyPvmFamily::members() const {
    std::vector<Povm> inputs;
    inputs.reserve(unitaries.size());
    for (const auto& u : unitaries) {
        if (static_cast<std::size_t>(u.rows()) != dim)
            throw ValidationError("unitary dimension does not match the family");
        inputs.push_back(pvm_from_unitary(u));
    }
    return add_white_noise(MeasurementSet(std::move(inputs)), visibility);
}

Assemblage steer(const BipartiteState& rho, const MeasurementSet& measurements) {
    if (measurements.dim() != rho.dim_a())
        throw ValidationError("steer: measurements act on dimension " +
                              std::to_string(measurements.dim()) + " but Alice holds " +
                              std::to_string(rho.dim_a()));
    const auto da = static_cast<Eigen::Index>(rho.dim_a());
    const auto db = static_cast<Eigen::Index>(rho.dim_b());
    const CMatrix& m = rho.matrix();
    std::vector<std::vector<CMatrix>> out;
    for (const auto& povm : measurements.inputs()) {
        std::vector<CMatrix> family;
        for (const auto& effect : povm) {
            // Tr_A[(E (x) 1) rho] = sum_{ik} E_{ki} rho_{(i,.),(k,.)}
            CMatrix s = CMatrix::Zero(db, db);
            for (Eigen::Index i = 0; i < da; ++i)
                for (Eigen::Index k = 0; k < da; ++k)
                    if (effect(k, i) != Complex(0.0))
                        s += effect(k, i) * m.block(i * db, k * db, db, db);
            family.push_back(hermitian_part(s));
        }
        out.push_back(std::move(family));
    }
    return Assemblage(std::move(out));
}

MeasurementMap assemblage_to_measurements(const Assemblage& sigma, const Tolerances& tol) {
    const CMatrix rho_b = hermitian_part(sigma.marginal());
    const auto eig = hermitian_eigen(rho_b);
    const auto d = eig.values.size();
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < d; ++i)
        if (eig.values(i) > tol.rank) kept.push_back(i);
    const auto r = static_cast<Eigen::Index>(kept.size());
    if (r == 0) throw ValidationError("assemblage marginal vanishes");

    CMatrix support;
    CMatrix inv_sqrt;  // maps the original space to support coordinates
    RVector restricted(r);
    if (r == d) {
        support = CMatrix::Identity(d, d);
        inv_sqrt = psd_pinv_sqrt(rho_b, tol).inverse_sqrt;
        for (Eigen::Index k = 0; k < r; ++k) restricted(k) = eig.values(kept[k]);
    } else {
        support.resize(d, r);
        for (Eigen::Index k = 0; k < r; ++k) {
            support.col(k) = eig.vectors.col(kept[k]);
            restricted(k) = eig.values(kept[k]);
        }
        const RVector scale = restricted.cwiseSqrt().cwiseInverse();
        inv_sqrt = scale.cast<Complex>().asDiagonal() * support.adjoint();
    }

    std::vector<Povm> inputs;
    for (const auto& family : sigma.inputs()) {
        Povm povm;
        for (const auto& s : family) povm.push_back(hermitian_part(inv_sqrt * s * inv_sqrt.adjoint()));
        inputs.push_back(std::move(povm));
    }
    CMatrix restricted_rho = r == d ? rho_b : CMatrix(restricted.cast<Complex>().asDiagonal());
    restricted_rho /= restricted_rho.trace().real();
    Tolerances loose = tol;
    loose.trace = std::max(tol.trace, tol.no_signaling);
    return {MeasurementSet(std::move(inputs), tol), DensityMatrix(rho_b, loose), support,
            DensityMatrix(restricted_rho, loose)};
}

Assemblage measurements_to_assemblage(const MeasurementSet& measurements,
                                      const DensityMatrix& marginal, const Tolerances& tol) {
    if (marginal.dim() != measurements.dim())
        throw ValidationError("measurements_to_assemblage: marginal dimension mismatch");
    if (min_eigenvalue(marginal.matrix()) <= tol.rank)
        throw ValidationError(
            "measurements_to_assemblage: marginal is rank deficient; restrict to its support first");
    const CMatrix root = psd_sqrt(marginal.matrix(), tol);
    std::vector<std::vector<CMatrix>> out;
    for (const auto& povm : measurements.inputs()) {
        std::vector<CMatrix> family;
        for (const auto& e : povm) family.push_back(hermitian_part(root * e * root));
        out.push_back(std::move(family));
    }
    return Assemblage(std::move(out), tol);
}

Assemblage measurements_to_assemblage(const MeasurementMap& map, const Tolerances& tol) {
    const Assemblage restricted =
        measurements_to_assemblage(map.measurements, map.restricted_marginal, tol);
    if (map.full_rank()) return restricted;
    std::vector<std::vector<CMatrix>> out;
    for (const auto& family : restricted.inputs()) {
        std::vector<CMatrix> lifted;
        for (const auto& s : family) lifted.push_back(map.support * s * map.support.adjoint());
        out.push_back(std::move(lifted));
    }
    return Assemblage(std::move(out), tol);
}

MeasurementSet add_white_noise(const MeasurementSet& measurements, double visibility) {
    check_visibility(visibility);
    const auto d = static_cast<Eigen::Index>(measurements.dim());
    const CMatrix id = CMatrix::Identity(d, d);
    std::vector<Povm> inputs;
    for (const auto& povm : measurements.inputs()) {
        Povm noisy;
        for (const auto& e : povm) {
            const double share = e.trace().real() / static_cast<double>(d);
            noisy.push_back(visibility * e + (1.0 - visibility) * share * id);
        }
        inputs.push_back(std::move(noisy));
    }
    return MeasurementSet(std::move(inputs));
}

BipartiteState isotropic(std::size_t d, double visibility) {
    check_visibility(visibility);
    if (d == 0) throw ValidationError("dimension must be positive");
    const CVector phi = phi_plus(d);
    const auto n = static_cast<Eigen::Index>(d * d);
    CMatrix rho = visibility * ket_bra(phi, phi) +
                  (1.0 - visibility) / static_cast<double>(n) * CMatrix::Identity(n, n);
    return BipartiteState(d, d, DensityMatrix(std::move(rho)));
}

Povm pvm_from_unitary(const CMatrix& unitary) {
    if (!is_unitary(unitary)) throw ValidationError("PVM generator is not unitary");
    Povm povm;
    for (Eigen::Index a = 0; a < unitary.cols(); ++a) {
        const CVector col = unitary.col(a);
        povm.push_back(ket_bra(col, col));
    }
    return povm;
}

MeasurementSet fourier_mub_measurements(std::size_t d, double visibility) {
    const MubPair mubs = fourier_mub_pair(d);
    std::vector<Povm> inputs(2);
    for (std::size_t a = 0; a < d; ++a) {
        inputs[0].push_back(ket_bra(mubs.computational[a], mubs.computational[a]));
        inputs[1].push_back(ket_bra(mubs.fourier[a], mubs.fourier[a]));
    }
    return add_white_noise(MeasurementSet(std::move(inputs)), visibility);
}

}  // namespace hdsteer
