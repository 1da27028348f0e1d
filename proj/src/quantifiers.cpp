#include "hdsteer/quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hdsteer {

namespace {

constexpr std::size_t kMaxStrategies = 4096;
constexpr std::size_t kMaxDim = 6;
constexpr std::size_t kMaxBipartiteDim = 36;
constexpr double kEmptyPart = 1e-9;
// Eigenvalues of rho at or below this are treated as outside its support.
constexpr double kSupportTol = 1e-14;

using Family = std::vector<std::vector<CMatrix>>;

void check_level(std::size_t level) {
    if (level == 0) throw ValidationError("weight level must be at least 1");
    if (level >= 2)
        throw UnsupportedError("weights for level n >= 2 are not supported: no tractable membership "
                               "test exists for the n-preparable, n-simulable or Schmidt-number-n sets");
}

std::vector<std::size_t> outcome_counts(const Family& family) {
    std::vector<std::size_t> counts;
    for (const auto& input : family) counts.push_back(input.size());
    return counts;
}

CMatrix clip_psd(const CMatrix& m) {
    const auto eig = hermitian_eigen(hermitian_part(m));
    const RVector clipped = eig.values.cwiseMax(0.0);
    return eig.vectors * clipped.asDiagonal() * eig.vectors.adjoint();
}

// Hermitian W with Re Tr(B_p W) = w_p for the HermitianParam basis (off-diagonals halved).
CMatrix dual_matrix(const HermitianParam& param, const RVector& w) {
    CMatrix out = param.assemble(w);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c)
            if (r != c) out(r, c) *= 0.5;
    return out;
}

// sum_x F_{strategy[x] | x}
CMatrix strategy_sum(const DeterministicStrategySet& strategies, std::size_t mu, const Family& f) {
    const auto& s = strategies.strategy(mu);
    CMatrix sum = f.at(0).at(s[0]);
    for (std::size_t x = 1; x < s.size(); ++x) sum += f[x][s[x]];
    return sum;
}

Family zeros_like(const Family& family) {
    Family out;
    for (const auto& input : family) {
        std::vector<CMatrix> row;
        for (const auto& e : input) row.push_back(CMatrix::Zero(e.rows(), e.cols()));
        out.push_back(std::move(row));
    }
    return out;
}

Family scaled(const Family& family, double factor) {
    Family out = family;
    for (auto& input : out)
        for (auto& e : input) e *= factor;
    return out;
}

Family lhs_combination(const DeterministicStrategySet& strategies, const std::vector<CMatrix>& parts,
                       const Family& shape) {
    Family out = zeros_like(shape);
    for (std::size_t mu = 0; mu < strategies.size(); ++mu) {
        const auto& s = strategies.strategy(mu);
        for (std::size_t x = 0; x < s.size(); ++x) out[x][s[x]] += parts[mu];
    }
    return out;
}

double min_strategy_eigenvalue(const DeterministicStrategySet& strategies, const Family& f,
                               const CMatrix& shift) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t mu = 0; mu < strategies.size(); ++mu)
        m = std::min(m, min_eigenvalue(strategy_sum(strategies, mu, f) + shift));
    return m;
}

void fill_solver_stats(WeightResult& result, const ConicSolution& sol) {
    result.gap = sol.gap;
    result.primal_residual = sol.primal_residual;
    result.dual_residual = sol.dual_residual;
    result.iterations = sol.iterations;
}

// Splits `object` = free_unnormalized + slack into normalized parts.
void fill_parts(WeightResult& result, const Family& object, const Family& free_unnormalized,
                double free_mass) {
    result.free_unnormalized = free_unnormalized;
    const double weight = 1.0 - free_mass;
    result.value = std::clamp(weight, 0.0, 1.0);
    if (free_mass > kEmptyPart) result.free_part = scaled(free_unnormalized, 1.0 / free_mass);
    if (weight > kEmptyPart) {
        Family residual = object;
        for (std::size_t x = 0; x < object.size(); ++x)
            for (std::size_t a = 0; a < object[x].size(); ++a)
                residual[x][a] = (object[x][a] - free_unnormalized[x][a]) / weight;
        result.residual = std::move(residual);
    }
}

std::vector<SparseEntry> partial_transpose_entries(const std::vector<SparseEntry>& entries,
                                                   std::size_t dim_b) {
    const auto db = static_cast<Eigen::Index>(dim_b);
    std::vector<SparseEntry> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        const Eigen::Index i = e.row / db, j = e.row % db;
        const Eigen::Index k = e.col / db, l = e.col % db;
        out.push_back({i * db + l, k * db + j, e.value});
    }
    return out;
}


// Entries of V E V^dagger for a sparse E.
std::vector<SparseEntry> lifted_entries(const std::vector<SparseEntry>& entries, const CMatrix& v) {
    CMatrix e = CMatrix::Zero(v.cols(), v.cols());
    for (const auto& entry : entries) e(entry.row, entry.col) += entry.value;
    const CMatrix full = v * e * v.adjoint();
    std::vector<SparseEntry> out;
    for (Eigen::Index r = 0; r < full.rows(); ++r)
        for (Eigen::Index c = 0; c < full.cols(); ++c)
            if (full(r, c) != Complex(0.0)) out.push_back({r, c, full(r, c)});
    return out;
}

// Extends a support-restricted PPT certificate (f on supp rho, h on the full space) to
// F = V f' V^dagger + t W W^dagger with F - h'^{T_B} >= I, where f', h' are f, h scaled so
// that the support block has margin delta. The Schur complement then fixes t ~ 1/delta.
// rho carries roundoff-sized mass `outside` on W, so t costs t * outside while delta costs
// delta * Tr(rho_S f'); delta is chosen to balance the two. Empty result signals failure.
CMatrix lift_support_certificate(const CMatrix& f, CMatrix& h, const CMatrix& v, const CMatrix& w,
                                 const CMatrix& rho_support, double outside, std::size_t da,
                                 std::size_t db) {
    const CMatrix ht = partial_transpose_b(h, da, db);
    const double s = min_eigenvalue(f - hermitian_part(v.adjoint() * ht * v));
    if (!(s > 0.0)) return CMatrix();
    const CMatrix id = CMatrix::Identity(ht.rows(), ht.cols());
    double best_cost = std::numeric_limits<double>::infinity(), best_kappa = 1.0 / s, best_t = 0.0;
    for (int e = -24; e <= 0; ++e) {  // delta from 1e-12 to 1 in half decades
        const double delta = std::pow(10.0, 0.5 * e);
        const double kappa = (1.0 + delta) / s;
        const CMatrix a = id + kappa * ht;
        const CMatrix g = hermitian_part(kappa * f - v.adjoint() * a * v);
        const CMatrix a_sq = v.adjoint() * a * w;
        const Eigen::LLT<CMatrix> llt(g);
        if (llt.info() != Eigen::Success) continue;
        const CMatrix schur = hermitian_part(w.adjoint() * a * w + a_sq.adjoint() * llt.solve(a_sq));
        const double t = std::max(0.0, hermitian_eigen(schur).values.maxCoeff());
        const double cost = kappa * real_trace_product(rho_support, f) + t * outside;
        if (cost < best_cost) {
            best_cost = cost;
            best_kappa = kappa;
            best_t = t;
        }
    }
    if (!std::isfinite(best_cost)) return CMatrix();
    h *= best_kappa;
    return hermitian_part(best_kappa * v * f * v.adjoint() + best_t * w * w.adjoint());
}

}  // namespace

DeterministicStrategySet::DeterministicStrategySet(std::vector<std::size_t> outcomes_per_input)
    : outcomes_(std::move(outcomes_per_input)) {
    if (outcomes_.empty()) throw ValidationError("strategy set needs at least one input");
    std::size_t total = 1;
    for (const std::size_t k : outcomes_) {
        if (k == 0) throw ValidationError("every input needs at least one outcome");
        if (total > kMaxStrategies / k)
            throw UnsupportedError("more than " + std::to_string(kMaxStrategies) +
                                   " deterministic strategies");
        total *= k;
    }
    strategies_.reserve(total);
    std::vector<std::size_t> current(outcomes_.size(), 0);
    for (std::size_t mu = 0; mu < total; ++mu) {
        strategies_.push_back(current);
        // Last input varies fastest.
        for (std::size_t x = outcomes_.size(); x-- > 0;) {
            if (++current[x] < outcomes_[x]) break;
            current[x] = 0;
        }
    }
}

double LinearCertificate::evaluate(const Family& object) const {
    if (object.size() != operators.size())
        throw ValidationError("certificate and object have different numbers of inputs");
    double total = 0.0;
    for (std::size_t x = 0; x < object.size(); ++x) {
        if (object[x].size() != operators[x].size())
            throw ValidationError("certificate and object have different numbers of outcomes");
        for (std::size_t a = 0; a < object[x].size(); ++a)
            total += real_trace_product(object[x][a], operators[x][a]);
    }
    return offset - total;
}

double LinearCertificate::evaluate(const Assemblage& sigma) const { return evaluate(sigma.inputs()); }

double LinearCertificate::evaluate(const MeasurementSet& measurements) const {
    return evaluate(measurements.inputs());
}

double LinearCertificate::evaluate(const CMatrix& state) const { return evaluate(Family{{state}}); }

WeightResult steering_weight(const Assemblage& sigma, std::size_t level, const SolverOptions& options) {
    check_level(level);
    const std::size_t d = sigma.dim();
    if (d > kMaxDim) throw UnsupportedError("steering_weight supports dimension at most 6");
    const Family& object = sigma.inputs();
    const DeterministicStrategySet strategies(outcome_counts(object));

    ConicProblem problem;
    std::vector<HermitianParam> tau;
    for (std::size_t mu = 0; mu < strategies.size(); ++mu) tau.push_back({mu * d * d, d});
    problem.num_vars = strategies.size() * d * d;
    problem.objective = RVector::Zero(static_cast<Eigen::Index>(problem.num_vars));

    for (const auto& t : tau) {
        const std::size_t block = problem.add_block(CMatrix::Zero(d, d));
        for (std::size_t p = 0; p < t.count(); ++p) {
            problem.add_term(block, t.offset + p, t.basis(p), -1.0);
            if (t.is_diagonal(p)) problem.objective(static_cast<Eigen::Index>(t.offset + p)) = 1.0;
        }
    }
    std::vector<std::vector<std::size_t>> element_block(object.size());
    for (std::size_t x = 0; x < object.size(); ++x)
        for (std::size_t a = 0; a < object[x].size(); ++a) {
            const std::size_t block = problem.add_block(object[x][a]);
            element_block[x].push_back(block);
            for (std::size_t mu = 0; mu < strategies.size(); ++mu) {
                if (!strategies.responds(mu, x, a)) continue;
                for (std::size_t p = 0; p < tau[mu].count(); ++p)
                    problem.add_term(block, tau[mu].offset + p, tau[mu].basis(p));
            }
        }

    const ConicSolution sol = solve_conic(problem, options);

    WeightResult result;
    fill_solver_stats(result, sol);
    std::vector<CMatrix> parts;
    double mass = 0.0;
    for (const auto& t : tau) {
        parts.push_back(t.assemble(sol.y));
        mass += parts.back().trace().real();
    }
    fill_parts(result, object, lhs_combination(strategies, parts, object), mass);

    // Certificate: clip multipliers to PSD, then rescale so every strategy sum dominates I.
    Family f = zeros_like(object);
    for (std::size_t x = 0; x < object.size(); ++x)
        for (std::size_t a = 0; a < object[x].size(); ++a)
            f[x][a] = clip_psd(sol.multipliers[element_block[x][a]]);
    const double m = min_strategy_eigenvalue(strategies, f, CMatrix::Zero(d, d));
    if (m <= 0.0) {
        for (auto& input : f)
            for (auto& e : input) e = CMatrix::Identity(d, d);
    } else if (m < 1.0) {
        f = scaled(f, 1.0 / m);
    }
    result.certificate.offset = 1.0;
    result.certificate.operators = std::move(f);
    result.certificate.free_bound = 0.0;
    result.certified_lower_bound = result.certificate.evaluate(object);
    return result;
}

WeightResult incompatibility_weight(const MeasurementSet& measurements, std::size_t level,
                                    const SolverOptions& options) {
    check_level(level);
    const std::size_t d = measurements.dim();
    if (d > kMaxDim) throw UnsupportedError("incompatibility_weight supports dimension at most 6");
    const Family& object = measurements.inputs();
    const DeterministicStrategySet strategies(outcome_counts(object));

    ConicProblem problem;
    std::vector<HermitianParam> g;
    for (std::size_t mu = 0; mu < strategies.size(); ++mu) g.push_back({mu * d * d, d});
    const std::size_t t_var = strategies.size() * d * d;
    problem.num_vars = t_var + 1;
    problem.objective = RVector::Zero(static_cast<Eigen::Index>(problem.num_vars));
    problem.objective(static_cast<Eigen::Index>(t_var)) = 1.0;

    for (const auto& gm : g) {
        const std::size_t block = problem.add_block(CMatrix::Zero(d, d));
        for (std::size_t p = 0; p < gm.count(); ++p) problem.add_term(block, gm.offset + p, gm.basis(p), -1.0);
    }
    std::vector<std::vector<std::size_t>> element_block(object.size());
    for (std::size_t x = 0; x < object.size(); ++x)
        for (std::size_t a = 0; a < object[x].size(); ++a) {
            const std::size_t block = problem.add_block(object[x][a]);
            element_block[x].push_back(block);
            for (std::size_t mu = 0; mu < strategies.size(); ++mu) {
                if (!strategies.responds(mu, x, a)) continue;
                for (std::size_t p = 0; p < g[mu].count(); ++p)
                    problem.add_term(block, g[mu].offset + p, g[mu].basis(p));
            }
        }
    // sum_mu G_mu = t I, one equality per Hermitian parameter.
    const HermitianParam local{0, d};
    for (std::size_t p = 0; p < d * d; ++p) {
        LinearEquality eq;
        for (const auto& gm : g) eq.coefficients.push_back({gm.offset + p, 1.0});
        if (local.is_diagonal(p)) eq.coefficients.push_back({t_var, -1.0});
        problem.equalities.push_back(std::move(eq));
    }

    const ConicSolution sol = solve_conic(problem, options);

    WeightResult result;
    fill_solver_stats(result, sol);
    std::vector<CMatrix> parts;
    CMatrix total = CMatrix::Zero(d, d);
    for (const auto& gm : g) {
        parts.push_back(gm.assemble(sol.y));
        total += parts.back();
    }
    // Free mass t read from the assembled parent POVM so that the reconstruction is exact.
    const double mass = total.trace().real() / static_cast<double>(d);
    fill_parts(result, object, lhs_combination(strategies, parts, object), mass);

    // Certificate (F, W): F >= 0, Tr W = -1, sum_x F_{mu(x)|x} + W >= 0 for every mu.
    Family f = zeros_like(object);
    for (std::size_t x = 0; x < object.size(); ++x)
        for (std::size_t a = 0; a < object[x].size(); ++a)
            f[x][a] = clip_psd(sol.multipliers[element_block[x][a]]);
    CMatrix w = hermitian_part(dual_matrix(local, sol.equality_multipliers));
    const double dd = static_cast<double>(d);
    w -= ((w.trace().real() + 1.0) / dd) * CMatrix::Identity(d, d);
    const double s = std::min(0.0, min_strategy_eigenvalue(strategies, f, w));
    const double denom = 1.0 - dd * std::abs(s);
    if (denom > 0.0) {
        w = (w + std::abs(s) * CMatrix::Identity(d, d)) / denom;
        f = scaled(f, 1.0 / denom);
    } else {
        // Trivial certificate: F = I, W = -I/d.
        for (auto& input : f)
            for (auto& e : input) e = CMatrix::Identity(d, d);
        w = -CMatrix::Identity(d, d) / dd;
    }
    result.certificate.offset = 1.0;
    result.certificate.operators = std::move(f);
    result.certificate.free_bound = 0.0;
    result.certificate.auxiliary = std::move(w);
    result.certified_lower_bound = result.certificate.evaluate(object);
    return result;
}

WeightResult entanglement_weight_ppt(const BipartiteState& rho, std::size_t level,
                                     const SolverOptions& options) {
    check_level(level);
    const std::size_t da = rho.dim_a(), db = rho.dim_b();
    const std::size_t dim = da * db;
    if (dim > kMaxBipartiteDim)
        throw UnsupportedError("entanglement_weight_ppt supports dimA * dimB at most 36");

    // X <= rho confines X to supp(rho). Writing X = V Y V^dagger on the support keeps the
    // rho - X block strictly feasible when rho is singular.
    const auto eig = hermitian_eigen(rho.matrix());
    std::vector<Eigen::Index> kept, dropped;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k)
        (eig.values(k) > kSupportTol ? kept : dropped).push_back(k);
    const bool full_support = dropped.empty();
    const std::size_t r = kept.size();
    CMatrix v = CMatrix::Identity(dim, dim), w(dim, static_cast<Eigen::Index>(dropped.size()));
    if (!full_support) {
        v.resize(dim, static_cast<Eigen::Index>(r));
        for (std::size_t k = 0; k < r; ++k) v.col(static_cast<Eigen::Index>(k)) = eig.vectors.col(kept[k]);
        for (std::size_t k = 0; k < dropped.size(); ++k)
            w.col(static_cast<Eigen::Index>(k)) = eig.vectors.col(dropped[k]);
    }
    const CMatrix restricted = full_support ? rho.matrix() : CMatrix(hermitian_part(v.adjoint() * rho.matrix() * v));

    ConicProblem problem;
    const HermitianParam y{0, r};
    problem.num_vars = y.count();
    problem.objective = RVector::Zero(static_cast<Eigen::Index>(problem.num_vars));
    const std::size_t positive = problem.add_block(CMatrix::Zero(r, r));
    const std::size_t ppt = problem.add_block(CMatrix::Zero(dim, dim));
    const std::size_t dominated = problem.add_block(restricted);
    for (std::size_t p = 0; p < y.count(); ++p) {
        const auto basis = y.basis(p);
        problem.add_term(positive, p, basis, -1.0);
        problem.add_term(ppt, p, partial_transpose_entries(full_support ? basis : lifted_entries(basis, v), db),
                         -1.0);
        problem.add_term(dominated, p, basis);
        if (y.is_diagonal(p)) problem.objective(static_cast<Eigen::Index>(p)) = 1.0;
    }

    const ConicSolution sol = solve_conic(problem, options);

    WeightResult result;
    fill_solver_stats(result, sol);
    const CMatrix free_part = full_support ? y.assemble(sol.y) : CMatrix(v * y.assemble(sol.y) * v.adjoint());
    const Family object{{rho.matrix()}};
    fill_parts(result, object, Family{{free_part}}, free_part.trace().real());
    result.exact = dim <= 6;

    // Certificate: F >= 0 and H >= 0 with F - H^{T_B} >= I, so Tr(rho F) >= 1 on PPT states.
    CMatrix h = clip_psd(sol.multipliers[ppt]);
    CMatrix f = clip_psd(sol.multipliers[dominated]);
    if (!full_support) {
        double outside = static_cast<double>(dim) * std::numeric_limits<double>::epsilon();
        for (const auto k : dropped) outside += std::abs(eig.values(k));
        f = lift_support_certificate(f, h, v, w, restricted, outside, da, db);
    }
    const double m = f.size() ? min_eigenvalue(f - partial_transpose_b(h, da, db)) : 0.0;
    if (m <= 0.0) {
        f = CMatrix::Identity(dim, dim);
        h = CMatrix::Zero(dim, dim);
    } else if (m < 1.0) {
        f /= m;
        h /= m;
    }
    result.certificate.offset = 1.0;
    result.certificate.operators = Family{{f}};
    result.certificate.free_bound = 0.0;
    result.certificate.auxiliary = std::move(h);
    result.certified_lower_bound = result.certificate.evaluate(rho.matrix());
    return result;
}

WeightInequality check_weight_inequality(const MeasurementSet& measurements,
                                         const BipartiteState& rho, const SolverOptions& options) {
    const std::size_t da = rho.dim_a(), db = rho.dim_b();
    const bool small = (da == 2 && (db == 2 || db == 3)) || (da == 3 && db == 2);
    if (!small)
        throw UnsupportedError("check_weight_inequality needs a 2x2 or 2x3 state so that the "
                               "PPT weight is exact");
    if (measurements.dim() != da)
        throw ValidationError("measurements must act on subsystem A");
    WeightInequality out;
    out.steering = steering_weight(steer(rho, measurements), 1, options);
    out.incompatibility = incompatibility_weight(measurements, 1, options);
    out.entanglement = entanglement_weight_ppt(rho, 1, options);
    out.lhs = out.steering.value;
    out.rhs = out.incompatibility.value * out.entanglement.value;
    out.holds = out.lhs <= out.rhs + 1e-5;
    return out;
}

}  // namespace hdsteer
