// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "hdsteer/channels.hpp"
#include "hdsteer/quantifiers.hpp"
#include "hdsteer/steering.hpp"
#include "hdsteer/witnesses.hpp"
#include "random_objects.hpp"

using namespace hdsteer;
using hdsteer::testing::Rng;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = limit_seconds <= 0 || secs < limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%d] %s: %s; runtime %.3f s", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    if (limit_seconds > 0) std::printf(" (limit %.0f s%s)", limit_seconds, in_time ? "" : ", exceeded");
    std::printf("\n");
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double family_distance(const std::vector<std::vector<CMatrix>>& a, const std::vector<std::vector<CMatrix>>& b) {
    if (a.size() != b.size()) return INFINITY;
    double worst = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x) {
        if (a[x].size() != b[x].size()) return INFINITY;
        for (std::size_t k = 0; k < a[x].size(); ++k) worst = std::max(worst, max_abs(a[x][k] - b[x][k]));
    }
    return worst;
}

BipartiteState phi(std::size_t d) { return BipartiteState(d, d, DensityMatrix::pure(phi_plus(d))); }

CMatrix unit(std::size_t d, std::size_t i, std::size_t j) {
    CMatrix e = CMatrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

KrausChannel random_channel(Rng& rng, std::size_t din, std::size_t dout, std::size_t kraus_count) {
    kraus_count = std::max(kraus_count, (din + dout - 1) / dout);  // an isometry needs dout * count >= din
    const Eigen::HouseholderQR<CMatrix> qr(rng.ginibre(dout * kraus_count, din));
    const CMatrix v = qr.householderQ() * CMatrix::Identity(dout * kraus_count, din);
    std::vector<CMatrix> kraus;
    for (std::size_t l = 0; l < kraus_count; ++l)
        kraus.push_back(v.block(static_cast<Eigen::Index>(l * dout), 0, dout, din));
    return KrausChannel(din, dout, std::move(kraus));
}

// Closed forms evaluated independently of the library.
double closed_iso(double d, double n) { return (n * d - 1) / (d * d - 1); }
double closed_pvm(double d, double n) { return (d * std::sqrt((n + 1) / (d + 1)) - 1) / (d - 1); }

Outcome witness_tightness() {
    double worst_value = 0.0, worst_bound = 0.0;
    for (std::size_t d = 2; d <= 8; ++d) {
        const Assemblage sigma = steer(phi(d), fourier_mub_measurements(d));
        worst_value = std::max(worst_value, std::abs(witness_value(sigma, ghds_witness(d)) - 2.0));
        worst_bound = std::max(worst_bound, std::abs(witness_bound(d, d) - 2.0));
    }
    return {worst_value <= 1e-9 && worst_bound <= 1e-12,
            "max |value-2| = " + fmt(worst_value) + ", max |bound(d,d)-2| = " + fmt(worst_bound) + " over d=2..8"};
}

Outcome region_reproduction() {
    const auto rows = region_table(4);
    if (rows.size() != 3) return {false, "expected 3 rows"};
    const double listed_pvm[] = {0.509975, 0.699459, 0.859243};
    double worst = 0.0, listed = 0.0;
    std::ostringstream values;
    for (const auto& r : rows) {
        const double n = double(r.n);
        worst = std::max({worst, std::abs(r.iso_sn_threshold - closed_iso(4, n)),
                          std::abs(r.pvm_nsim_threshold - closed_pvm(4, n))});
        listed = std::max(listed, std::abs(r.pvm_nsim_threshold - listed_pvm[r.n - 1]));
        values << (r.n > 1 ? " " : "") << fmt(r.iso_sn_threshold) << "/" << r.pvm_nsim_threshold;
    }
    return {worst <= 1e-6, "sn/pvm boundaries " + values.str() + ", max deviation from closed form " + fmt(worst) +
                               " (from the tabulated pvm literals " + fmt(listed) + ")"};
}

Outcome jm_threshold() {
    const double t = mub_nsim_threshold(2, 1);
    const double dev = std::abs(t - 1.0 / std::sqrt(2.0));
    const WeightResult w = incompatibility_weight(fourier_mub_measurements(2, 1.0 / std::sqrt(2.0) - 1e-3));
    return {dev <= 1e-12 && std::abs(w.value) <= 1e-5,
            "|mub(2,1) - 1/sqrt2| = " + fmt(dev) + ", weight below threshold = " + fmt(w.value)};
}

Outcome map_roundtrips() {
    Rng rng(1004);
    double worst = 0.0;
    int deficient = 0;
    for (std::size_t d = 2; d <= 4; ++d)
        for (int trial = 0; trial < 100; ++trial) {
            Assemblage sigma = steer(BipartiteState(d, d, rng.density(d * d)), rng.measurements(d, 2, 3));
            if (trial % 3 == 0) {
                // Supported on C^d (x) V with dim V = r < d.
                const std::size_t r = 1 + rng.index(d - 1);
                const CMatrix big = tensor(CMatrix::Identity(d, d), CMatrix(rng.haar_unitary(d).leftCols(r)));
                const BipartiteState rho(d, d, hermitian_part(big * rng.density(d * r) * big.adjoint()));
                sigma = steer(rho, rng.measurements(d, 2, 3));
                ++deficient;
            }
            const MeasurementMap map = assemblage_to_measurements(sigma);
            worst = std::max(worst, family_distance(measurements_to_assemblage(map).inputs(), sigma.inputs()));
            const Assemblage again = measurements_to_assemblage(map.measurements, map.restricted_marginal);
            worst = std::max(worst, family_distance(assemblage_to_measurements(again).measurements.inputs(),
                                                    map.measurements.inputs()));
        }
    return {worst <= 1e-10, "300 instances (" + std::to_string(deficient) +
                                " rank-deficient), max roundtrip error " + fmt(worst)};
}

Outcome noise_passing() {
    Rng rng(1005);
    double worst_transpose = 0.0, worst_noise = 0.0;
    for (std::size_t d = 2; d <= 4; ++d)
        for (int trial = 0; trial < 10; ++trial) {
            const MeasurementSet m = rng.measurements(d, 2, 1 + rng.index(4));
            const Assemblage sigma = steer(phi(d), m);
            for (std::size_t x = 0; x < m.num_inputs(); ++x)
                for (std::size_t a = 0; a < m.num_outcomes(x); ++a)
                    worst_transpose = std::max(worst_transpose,
                                               max_abs(sigma.element(x, a) - m.effect(x, a).transpose() / double(d)));
            for (int k = 0; k <= 10; ++k) {
                const double eta = k / 10.0;
                worst_noise = std::max(worst_noise, family_distance(steer(phi(d), add_white_noise(m, eta)).inputs(),
                                                                    steer(isotropic(d, eta), m).inputs()));
            }
        }
    return {worst_transpose <= 1e-12 && worst_noise <= 1e-12,
            "max |sigma - M^T/d| = " + fmt(worst_transpose) + ", max noise-passing error " + fmt(worst_noise)};
}

Outcome channel_state_duality() {
    Rng rng(1006);
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t din = 2 + rng.index(3), dout = 2 + rng.index(3);
        const KrausChannel ch = random_channel(rng, din, dout, 1 + rng.index(4));
        const DensityMatrix sigma = trial % 2 ? DensityMatrix(rng.density(din)) : DensityMatrix::maximally_mixed(din);
        const KrausChannel back = state_to_channel(choi_of(ch, sigma).bipartite(), sigma);
        for (std::size_t i = 0; i < din; ++i)
            for (std::size_t j = 0; j < din; ++j)
                worst = std::max(worst, max_abs(apply_operator(ch, unit(din, i, j)) -
                                                apply_operator(back, unit(din, i, j))));
    }
    // Pure Schmidt-rank-r term completed by product terms so that the marginal is full rank.
    const std::size_t d = 3;
    const double schmidt[] = {0.5, 0.3, 0.2};
    const std::vector<std::vector<double>> weights = {{0.5, 0.3, 0.2}, {0.7, 0.3}, {1.0}};
    std::string ranks;
    bool ranks_ok = true;
    for (std::size_t r = 1; r <= 3; ++r) {
        const CMatrix u = rng.haar_unitary(d);
        double norm = 0.0;
        for (std::size_t i = 0; i < r; ++i) norm += schmidt[i];
        CVector psi = CVector::Zero(d * d);
        for (std::size_t i = 0; i < r; ++i)
            psi += std::sqrt(schmidt[i] / norm) *
                   tensor(u.col(Eigen::Index(i)), CMatrix::Identity(d, d).col(Eigen::Index(i)));
        const auto& w = weights[r - 1];
        CMatrix rho = w[0] * psi * psi.adjoint();
        for (std::size_t k = r; k < d; ++k) {
            const CVector v = tensor(rng.ket(d), CMatrix::Identity(d, d).col(Eigen::Index(k)));
            rho += w[1 + k - r] * v * v.adjoint();
        }
        const BipartiteState state(d, d, hermitian_part(rho));
        const DensityMatrix sigma(partial_trace(state, Subsystem::B));
        const PebCertificate cert = peb_certificate(state_to_channel(state, sigma));
        const std::size_t from_term = rank_with_tol(kraus_from_pure_term({1.0, psi}, d, d, sigma));
        ranks_ok = ranks_ok && cert.max_rank == r && from_term == r;
        ranks += (r > 1 ? "," : "") + std::to_string(cert.max_rank);
    }
    return {worst <= 1e-9 && ranks_ok,
            "max operator-basis error " + fmt(worst) + ", Kraus ranks for Schmidt 1,2,3: " + ranks};
}

Outcome weight_inequality() {
    Rng rng(1007);
    double worst_slack = INFINITY;
    int held = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const MeasurementSet m = rng.measurements(2, 2, 2);
        const BipartiteState rho(2, 2, rng.density(4, 1 + rng.index(4)));
        const WeightInequality w = check_weight_inequality(m, rho);
        worst_slack = std::min(worst_slack, w.rhs - w.lhs);
        held += w.holds;
    }
    const WeightInequality sharp = check_weight_inequality(fourier_mub_measurements(2), phi(2));
    const bool near = std::abs(sharp.lhs - 0.2929) <= 1e-4 && std::abs(sharp.rhs - 0.2929) <= 1e-4;
    return {worst_slack >= -1e-5 && near,
            std::to_string(held) + "/100 random instances hold, min slack " + fmt(worst_slack) +
                "; sharp-MUB Phi+ case lhs = " + fmt(sharp.lhs) + ", rhs = " + fmt(sharp.rhs) +
                " (expected 0.2929 +- 1e-4" + (near ? ")" : ", not met)")};
}

Outcome certificate_soundness() {
    Rng rng(1008);
    double worst_violation = -INFINITY, worst_gap = 0.0, worst_primal_match = 0.0;
    int results = 0;
    const auto track = [&](const WeightResult& r, const std::function<double()>& free_member) {
        ++results;
        worst_gap = std::max(worst_gap, r.gap);
        worst_primal_match = std::max(worst_primal_match, std::abs(r.certified_lower_bound - r.value));
        for (int k = 0; k < 1000; ++k) worst_violation = std::max(worst_violation, free_member() - r.certificate.free_bound);
    };
    for (int trial = 0; trial < 3; ++trial) {
        const Assemblage sigma = steer(BipartiteState(2, 2, rng.density(4)), rng.measurements(2, 2, 2));
        const WeightResult r = steering_weight(sigma);
        track(r, [&] { return r.certificate.evaluate(rng.lhs_assemblage(2, {2, 2})); });
    }
    {
        const WeightResult r = steering_weight(steer(isotropic(3, 0.9), fourier_mub_measurements(3)));
        track(r, [&] { return r.certificate.evaluate(rng.lhs_assemblage(3, {3, 3})); });
    }
    for (int trial = 0; trial < 3; ++trial) {
        const WeightResult r = incompatibility_weight(rng.measurements(2, 2, 2));
        track(r, [&] { return r.certificate.evaluate(rng.jm_measurements(2, {2, 2})); });
    }
    {
        const WeightResult r = incompatibility_weight(fourier_mub_measurements(3, 0.9));
        track(r, [&] { return r.certificate.evaluate(rng.jm_measurements(3, {3, 3})); });
    }
    for (std::size_t rank = 1; rank <= 4; ++rank) {
        const WeightResult r = entanglement_weight_ppt(BipartiteState(2, 2, rng.density(4, rank)));
        track(r, [&] { return r.certificate.evaluate(rng.separable(2, 2, 1 + rng.index(6))); });
    }
    for (const std::size_t rank : {0, 2, 3}) {  // 0: full rank
        const WeightResult r = entanglement_weight_ppt(BipartiteState(2, 3, rng.density(6, rank)));
        track(r, [&] { return r.certificate.evaluate(rng.separable(2, 3, 1 + rng.index(6))); });
    }
    return {worst_violation <= 1e-9 && worst_gap < 1e-6 && worst_primal_match <= 1e-6,
            std::to_string(results) + " results x 1000 free members, max S - bound " + fmt(worst_violation) +
                ", max gap " + fmt(worst_gap) + ", max |certified - value| " + fmt(worst_primal_match)};
}

}  // namespace

int main() {
    criterion(1, "witness tightness", 1, witness_tightness);
    criterion(2, "region table d=4", 1, region_reproduction);
    criterion(3, "qubit MUB joint-measurability threshold", 10, jm_threshold);
    criterion(4, "assemblage/measurement roundtrips", 30, map_roundtrips);
    criterion(5, "transpose and noise passing", 10, noise_passing);
    criterion(6, "channel-state duality and Kraus ranks", 10, channel_state_duality);
    criterion(7, "weight inequality at n=1", 300, weight_inequality);
    criterion(8, "dual certificate soundness", 0, certificate_soundness);
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
