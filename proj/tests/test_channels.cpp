#include "hdsteer/channels.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "hdsteer/steering.hpp"
#include "hdsteer/witnesses.hpp"
#include "random_objects.hpp"

using namespace hdsteer;
using hdsteer::testing::Rng;

namespace {

// Kraus operators cut from a random Stinespring isometry.
KrausChannel random_channel(Rng& rng, std::size_t din, std::size_t dout, std::size_t kraus_count) {
    kraus_count = std::max(kraus_count, (din + dout - 1) / dout);  // an isometry needs dout * count >= din
    const Eigen::HouseholderQR<CMatrix> qr(rng.ginibre(dout * kraus_count, din));
    const CMatrix v = qr.householderQ() * CMatrix::Identity(dout * kraus_count, din);
    std::vector<CMatrix> kraus;
    for (std::size_t l = 0; l < kraus_count; ++l)
        kraus.push_back(v.block(static_cast<Eigen::Index>(l * dout), 0, dout, din));
    return KrausChannel(din, dout, std::move(kraus));
}

CMatrix unit(std::size_t d, std::size_t i, std::size_t j) {
    CMatrix e = CMatrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

double channel_distance(const KrausChannel& a, const KrausChannel& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.dim_in(); ++i)
        for (std::size_t j = 0; j < a.dim_in(); ++j)
            worst = std::max(worst, max_abs(apply_operator(a, unit(a.dim_in(), i, j)) -
                                            apply_operator(b, unit(a.dim_in(), i, j))));
    return worst;
}

// The six Pauli eigenstates: a 2-design, so (1/6) sum |psi><psi| (x) |psi*><psi*| = iso(1/3).
std::vector<PureTerm> iso_third_product_terms() {
    const double s = 1.0 / std::sqrt(2.0);
    const Complex i(0.0, 1.0);
    std::vector<CVector> kets;
    for (const std::array<Complex, 2> v : {std::array<Complex, 2>{1.0, 0.0}, {0.0, 1.0}, {s, s}, {s, -s},
                                           {s, s * i}, {s, -s * i}}) {
        CVector k(2);
        k << v[0], v[1];
        kets.push_back(k);
    }
    std::vector<PureTerm> terms;
    for (const auto& k : kets) {
        const CVector conj = k.conjugate();
        CVector prod(4);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) prod(2 * a + b) = k(a) * conj(b);
        terms.push_back({1.0 / 6.0, prod});
    }
    return terms;
}

}  // namespace

TEST(Channel, CompletenessValidated) {
    EXPECT_THROW(KrausChannel(2, 2, {CMatrix::Identity(2, 2) * 0.9}), ValidationError);
    EXPECT_THROW(KrausChannel(2, 2, {CMatrix::Identity(3, 3)}), ValidationError);
    EXPECT_THROW(KrausChannel(2, 2, {}), ValidationError);
    EXPECT_THROW(depolarizing(2, 1.5), ValidationError);
}

TEST(Apply, Examples) {
    Rng rng(30);
    const DensityMatrix rho(rng.density(3));
    EXPECT_LT(max_abs(apply(KrausChannel::identity(3), rho).matrix() - rho.matrix()), 1e-15);
    EXPECT_LT(max_abs(apply(depolarizing(3, 0.0), rho).matrix() - CMatrix::Identity(3, 3) / 3.0), 1e-12);
    for (std::size_t d = 2; d <= 4; ++d)
        for (const double eta : {0.0, 0.3, 1.0}) {
            const CMatrix phi = DensityMatrix::pure(phi_plus(d)).matrix();
            EXPECT_LT(max_abs(apply_on_first(depolarizing(d, eta), phi, d) - isotropic(d, eta).matrix()), 1e-12);
        }
    EXPECT_THROW(apply(KrausChannel::identity(2), rho), ValidationError);
}

TEST(Apply, PreservesTrace) {
    Rng rng(31);
    const KrausChannel ch = random_channel(rng, 3, 2, 4);
    const DensityMatrix out = apply(ch, DensityMatrix(rng.density(3)));
    EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-10);
}

TEST(DualApply, Examples) {
    Rng rng(32);
    const MeasurementSet m = rng.measurements(3, 2, 3);
    const MeasurementSet same = dual_apply(KrausChannel::identity(3), m);
    const MeasurementSet noisy = dual_apply(depolarizing(3, 0.4), m);
    const MeasurementSet expected = add_white_noise(m, 0.4);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t a = 0; a < 3; ++a) {
            EXPECT_LT(max_abs(same.effect(x, a) - m.effect(x, a)), 1e-15);
            EXPECT_LT(max_abs(noisy.effect(x, a) - expected.effect(x, a)), 1e-12);
        }
    EXPECT_THROW(dual_apply(KrausChannel::identity(2), m), ValidationError);
}

TEST(DualApply, DualityProperty) {
    Rng rng(33);
    for (std::size_t d = 2; d <= 4; ++d)
        for (int trial = 0; trial < 20; ++trial) {
            const KrausChannel ch = random_channel(rng, d, d, 1 + rng.index(4));
            const DensityMatrix rho(rng.density(d));
            const MeasurementSet m = rng.measurements(d, 2, 3);
            const MeasurementSet dual = dual_apply(ch, m);
            const CMatrix out = apply(ch, rho).matrix();
            for (std::size_t x = 0; x < 2; ++x)
                for (std::size_t a = 0; a < 3; ++a)
                    EXPECT_NEAR(real_trace_product(dual.effect(x, a), rho.matrix()),
                                real_trace_product(m.effect(x, a), out), 1e-10);
        }
}

TEST(Choi, Examples) {
    for (std::size_t d = 2; d <= 4; ++d) {
        const DensityMatrix flat = DensityMatrix::maximally_mixed(d);
        const ChoiState id = choi_of(KrausChannel::identity(d), flat);
        EXPECT_LT(max_abs(id.state - DensityMatrix::pure(phi_plus(d)).matrix()), 1e-12);
        for (int k = 0; k <= 10; ++k) {
            const double eta = k / 10.0;
            EXPECT_LT(max_abs(choi_of(depolarizing(d, eta), flat).state - isotropic(d, eta).matrix()), 1e-12);
        }
    }
    EXPECT_THROW(choi_of(KrausChannel::identity(2), DensityMatrix(basis_projector(2, 0))), ValidationError);
    EXPECT_THROW(choi_of(KrausChannel::identity(2), DensityMatrix::maximally_mixed(3)), ValidationError);
}

TEST(Choi, MarginalMatchesSigma) {
    Rng rng(34);
    const DensityMatrix sigma(rng.density(3));
    const ChoiState choi = choi_of(random_channel(rng, 3, 2, 3), sigma);
    EXPECT_LT(max_abs(choi.marginal - sigma.matrix()), 1e-12);
    EXPECT_NEAR(choi.state.trace().real(), 1.0, 1e-12);
    EXPECT_GT(min_eigenvalue(choi.state), -1e-12);
}

TEST(StateToChannel, Examples) {
    const KrausChannel id = state_to_channel(BipartiteState(3, 3, DensityMatrix::pure(phi_plus(3))),
                                             DensityMatrix::maximally_mixed(3));
    ASSERT_EQ(id.kraus().size(), 1u);
    const CMatrix& k = id.kraus()[0];
    const Complex phase = k(0, 0);
    EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);
    EXPECT_LT(max_abs(k - phase * CMatrix::Identity(3, 3)), 1e-12);

    const double eta = 0.35;
    const KrausChannel dep = state_to_channel(isotropic(3, eta), DensityMatrix::maximally_mixed(3));
    const CMatrix out = apply_operator(dep, basis_projector(3, 0));
    EXPECT_LT(max_abs(out - (eta * basis_projector(3, 0) + (1 - eta) * CMatrix::Identity(3, 3) / 3.0)), 1e-12);

    EXPECT_THROW(state_to_channel(isotropic(2, 0.5), DensityMatrix(CMatrix(Eigen::Vector2cd(0.7, 0.3).asDiagonal()))),
                 ValidationError);
}

TEST(StateToChannel, RoundtripOnMatrixUnits) {
    Rng rng(35);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t din = 2 + rng.index(3), dout = 2 + rng.index(3);
        const KrausChannel ch = random_channel(rng, din, dout, 1 + rng.index(5));
        const DensityMatrix sigma(rng.density(din));
        const ChoiState choi = choi_of(ch, sigma);
        const KrausChannel back = state_to_channel(choi.bipartite(), sigma);
        EXPECT_LT(channel_distance(ch, back), 1e-9);
    }
}

TEST(StateToChannel, KrausRankEqualsSchmidtRank) {
    Rng rng(36);
    const std::size_t d = 3;
    const double schmidt[] = {0.5, 0.3, 0.2};
    // Weight of psi_r, then of the product terms |u_k>|k> filling the B levels k >= r.
    const std::vector<std::vector<double>> weights = {{0.5, 0.3, 0.2}, {0.7, 0.3}, {1.0}};
    for (std::size_t r = 1; r <= 3; ++r) {
        const CMatrix u = rng.haar_unitary(d);
        double norm = 0.0;
        for (std::size_t i = 0; i < r; ++i) norm += schmidt[i];
        CVector psi = CVector::Zero(d * d);
        for (std::size_t i = 0; i < r; ++i)
            psi += std::sqrt(schmidt[i] / norm) * tensor(u.col(Eigen::Index(i)), CMatrix::Identity(d, d).col(Eigen::Index(i)));
        const auto& w = weights[r - 1];
        CMatrix rho = w[0] * psi * psi.adjoint();
        for (std::size_t k = r; k < d; ++k) {
            const CVector v = tensor(rng.ket(d), CMatrix::Identity(d, d).col(Eigen::Index(k)));
            rho += w[1 + k - r] * v * v.adjoint();
        }
        const BipartiteState state(d, d, hermitian_part(rho));
        const DensityMatrix sigma(partial_trace(state, Subsystem::B));
        const PebCertificate cert = peb_certificate(state_to_channel(state, sigma));
        ASSERT_EQ(cert.kraus_ranks.size(), 1 + (d - r));
        EXPECT_EQ(cert.kraus_ranks[0], r);
        for (std::size_t k = 1; k < cert.kraus_ranks.size(); ++k) EXPECT_EQ(cert.kraus_ranks[k], 1u);
        EXPECT_EQ(cert.max_rank, r);
        EXPECT_EQ(rank_with_tol(kraus_from_pure_term({1.0, psi}, d, d, sigma)), r);
    }
}

TEST(PebCertificate, Examples) {
    const PebCertificate breaking = peb_certificate(depolarizing(2, 0.0));
    EXPECT_EQ(breaking.kraus_ranks, (std::vector<std::size_t>{1, 1, 1, 1}));
    EXPECT_EQ(breaking.n, 1u);
    const PebCertificate id = peb_certificate(KrausChannel::identity(4));
    EXPECT_EQ(id.kraus_ranks, std::vector<std::size_t>{4});
    EXPECT_EQ(id.n, 4u);
}

TEST(PebCertificate, IsotropicThirdFixture) {
    const BipartiteState rho = isotropic(2, 1.0 / 3.0);
    const DensityMatrix flat = DensityMatrix::maximally_mixed(2);
    // Raw eigenvectors are Bell states: rank 2.
    EXPECT_EQ(peb_certificate(state_to_channel(rho, flat)).max_rank, 2u);
    const PebCertificate product = peb_certificate(rho, flat, iso_third_product_terms());
    EXPECT_EQ(product.max_rank, 1u);
    EXPECT_EQ(product.kraus_ranks.size(), 6u);
    // A decomposition that does not rebuild the state is rejected.
    auto wrong = iso_third_product_terms();
    wrong.pop_back();
    EXPECT_THROW(peb_certificate(rho, flat, wrong), ValidationError);
}

TEST(PebCertificate, DepolarizingBelowSeparabilityIsOnePeb) {
    // iso(eta) = 3 eta iso(1/3) + (1 - 3 eta) I/4 for eta <= 1/3.
    for (const double eta : {0.0, 0.1, 0.2, 1.0 / 3.0}) {
        std::vector<PureTerm> terms;
        for (auto t : iso_third_product_terms()) {
            t.weight *= 3 * eta;
            if (t.weight > 0) terms.push_back(t);
        }
        for (std::size_t k = 0; k < 4 && 1 - 3 * eta > 1e-15; ++k) {
            CVector v = CVector::Zero(4);
            v(static_cast<Eigen::Index>(k)) = 1.0;
            terms.push_back({(1 - 3 * eta) / 4.0, v});
        }
        const PebCertificate cert = peb_certificate(isotropic(2, eta), DensityMatrix::maximally_mixed(2), terms);
        EXPECT_EQ(cert.n, 1u) << "eta=" << eta;
        EXPECT_LE(eta, iso_sn_threshold(2, 1) + 1e-15);
    }
}

TEST(TransposeClosure, DualCommutesAndRanksKept) {
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const KrausChannel ch = random_channel(rng, 3, 3, 1 + rng.index(3));
        const MeasurementSet n = rng.measurements(3, 2, 3);
        const MeasurementSet lhs = dual_apply(conjugate_channel(ch), transpose_measurements(n));
        const MeasurementSet rhs = dual_apply(ch, n);
        for (std::size_t x = 0; x < 2; ++x)
            for (std::size_t a = 0; a < 3; ++a) EXPECT_LT(max_abs(lhs.effect(x, a) - rhs.effect(x, a).transpose()), 1e-12);
        EXPECT_EQ(peb_certificate(conjugate_channel(ch)).kraus_ranks, peb_certificate(ch).kraus_ranks);
    }
}

TEST(PibWitness, Examples) {
    const PibCheck id = pib_witness_check(KrausChannel::identity(4), DensityMatrix::maximally_mixed(4), 3);
    EXPECT_TRUE(id.refuted);
    EXPECT_NEAR(id.witness_value, 2.0, 1e-12);
    EXPECT_NEAR(id.bound, 1.9019237886, 1e-9);

    const PibCheck dep = pib_witness_check(depolarizing(4, 0.5), DensityMatrix::maximally_mixed(4), 1);
    EXPECT_FALSE(dep.refuted);
    EXPECT_NEAR(dep.witness_value, 1.25, 1e-12);

    Rng rng(39);
    EXPECT_THROW(pib_witness_check(random_channel(rng, 2, 3, 2), DensityMatrix::maximally_mixed(2), 1), ValidationError);
}

TEST(PibWitness, OnePebChannelsNeverRefuted) {
    Rng rng(38);
    for (int trial = 0; trial < 20; ++trial) {
        // Measure-and-prepare: rank-1 Kraus operators sqrt(p_k) |target><v_k| from each effect's eigenvectors.
        const std::size_t d = 2 + rng.index(3);
        const Povm povm = rng.povm(d, 3);
        std::vector<CMatrix> kraus;
        for (const auto& e : povm) {
            const auto eig = hermitian_eigen(e);
            for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
                if (eig.values(k) < 1e-14) continue;
                const CVector target = rng.ket(d);
                kraus.push_back(std::sqrt(eig.values(k)) * target * eig.vectors.col(k).adjoint());
            }
        }
        const KrausChannel ch(d, d, kraus);
        EXPECT_EQ(peb_certificate(ch).n, 1u);
        for (std::size_t n = 1; n < d; ++n)
            EXPECT_FALSE(pib_witness_check(ch, DensityMatrix(rng.density(d)), n).refuted);
    }
}

TEST(PibWitness, RefutedOnlyAboveMubThreshold) {
    for (std::size_t d = 2; d <= 5; ++d) {
        const double t = mub_nsim_threshold(d, 1);
        const DensityMatrix flat = DensityMatrix::maximally_mixed(d);
        EXPECT_FALSE(pib_witness_check(depolarizing(d, t - 1e-6), flat, 1).refuted);
        EXPECT_FALSE(pib_witness_check(depolarizing(d, t), flat, 1).refuted);
        EXPECT_TRUE(pib_witness_check(depolarizing(d, t + 1e-6), flat, 1).refuted);
    }
}
