#include "hdsteer/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hdsteer {

std::size_t ConicProblem::add_block(CMatrix constant) {
    LmiBlock block;
    block.dim = static_cast<std::size_t>(constant.rows());
    block.constant = std::move(constant);
    blocks.push_back(std::move(block));
    return blocks.size() - 1;
}

void ConicProblem::add_term(std::size_t block, std::size_t var,
                            const std::vector<SparseEntry>& entries, double scale) {
    auto& terms = blocks.at(block).terms;
    auto it = std::find_if(terms.begin(), terms.end(),
                           [&](const BlockTerm& t) { return t.var == var; });
    if (it == terms.end()) {
        terms.push_back({var, {}});
        it = std::prev(terms.end());
    }
    for (const auto& e : entries) it->entries.push_back({e.row, e.col, scale * e.value});
}

void ConicProblem::validate() const {
    if (static_cast<std::size_t>(objective.size()) != num_vars)
        throw ValidationError("conic problem: objective length differs from the variable count");
    for (const auto& block : blocks) {
        const auto n = static_cast<Eigen::Index>(block.dim);
        if (block.dim == 0 || block.constant.rows() != n || block.constant.cols() != n)
            throw ValidationError("conic problem: block constant has the wrong shape");
        if (!is_hermitian(block.constant))
            throw ValidationError("conic problem: block constant is not Hermitian");
        for (const auto& term : block.terms) {
            if (term.var >= num_vars)
                throw ValidationError("conic problem: term references an unknown variable");
            CMatrix a = CMatrix::Zero(n, n);
            for (const auto& e : term.entries) {
                if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
                    throw ValidationError("conic problem: coefficient entry out of range");
                a(e.row, e.col) += e.value;
            }
            if (!is_hermitian(a)) throw ValidationError("conic problem: coefficient is not Hermitian");
        }
    }
    for (const auto& eq : equalities)
        for (const auto& [var, coeff] : eq.coefficients)
            if (var >= num_vars || !std::isfinite(coeff))
                throw ValidationError("conic problem: bad equality coefficient");
}

std::vector<SparseEntry> HermitianParam::basis(std::size_t p) const {
    if (p < dim) return {{static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p), 1.0}};
    // Off-diagonal pairs in row-major order of the strict upper triangle.
    std::size_t q = (p - dim) / 2;
    const bool imaginary = ((p - dim) % 2) == 1;
    std::size_t j = 0;
    while (q >= dim - 1 - j) {
        q -= dim - 1 - j;
        ++j;
    }
    const auto r = static_cast<Eigen::Index>(j);
    const auto c = static_cast<Eigen::Index>(j + 1 + q);
    if (imaginary) return {{r, c, Complex(0.0, 1.0)}, {c, r, Complex(0.0, -1.0)}};
    return {{r, c, 1.0}, {c, r, 1.0}};
}

CMatrix HermitianParam::assemble(const RVector& y) const {
    const auto n = static_cast<Eigen::Index>(dim);
    CMatrix h = CMatrix::Zero(n, n);
    for (std::size_t p = 0; p < count(); ++p)
        for (const auto& e : basis(p)) h(e.row, e.col) += y(static_cast<Eigen::Index>(offset + p)) * e.value;
    return h;
}

std::vector<SparseEntry> shifted(std::vector<SparseEntry> entries, Eigen::Index row_offset,
                                 Eigen::Index col_offset) {
    for (auto& e : entries) {
        e.row += row_offset;
        e.col += col_offset;
    }
    return entries;
}

std::string to_string(SolverStatus status) {
    switch (status) {
        case SolverStatus::Optimal: return "optimal";
        case SolverStatus::Infeasible: return "infeasible";
        case SolverStatus::Unbounded: return "unbounded";
        case SolverStatus::IterationLimit: return "iteration_limit";
        case SolverStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

SolverError::SolverError(const std::string& what, ConicSolution last)
    : Error(what), last_(std::move(last)) {}

namespace {

using Blocks = std::vector<CMatrix>;

struct Workspace {
    const ConicProblem& problem;
    std::size_t m;  // variables
    std::size_t q;  // equalities
    Eigen::MatrixXd equality_matrix;
    RVector equality_rhs;
    double total_dim = 0.0;

    explicit Workspace(const ConicProblem& p)
        : problem(p), m(p.num_vars), q(p.equalities.size()) {
        equality_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(m));
        equality_rhs = RVector::Zero(static_cast<Eigen::Index>(q));
        for (std::size_t r = 0; r < q; ++r) {
            for (const auto& [var, coeff] : p.equalities[r].coefficients)
                equality_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(var)) += coeff;
            equality_rhs(static_cast<Eigen::Index>(r)) = p.equalities[r].rhs;
        }
        for (const auto& b : p.blocks) total_dim += static_cast<double>(b.dim);
    }

    // sum_i y_i A_{i,k} for every block
    Blocks adjoint(const RVector& y) const {
        Blocks out;
        out.reserve(problem.blocks.size());
        for (const auto& block : problem.blocks) {
            CMatrix acc = CMatrix::Zero(block.dim, block.dim);
            for (const auto& term : block.terms) {
                const double v = y(static_cast<Eigen::Index>(term.var));
                if (v == 0.0) continue;
                for (const auto& e : term.entries) acc(e.row, e.col) += v * e.value;
            }
            out.push_back(std::move(acc));
        }
        return out;
    }

    // (A(G))_i = sum_k Re Tr(A_{i,k} G_k)
    RVector forward(const Blocks& g) const {
        RVector out = RVector::Zero(static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
            const CMatrix& gk = g[k];
            for (const auto& term : problem.blocks[k].terms) {
                Complex acc = 0.0;
                for (const auto& e : term.entries) acc += e.value * gk(e.col, e.row);
                out(static_cast<Eigen::Index>(term.var)) += acc.real();
            }
        }
        return out;
    }

    // M_ij = sum_k Re Tr(A_{i,k} X_k A_{j,k} Z_k^{-1})
    Eigen::MatrixXd schur(const Blocks& x, const Blocks& zinv) const {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
            const auto& terms = problem.blocks[k].terms;
            const CMatrix& xk = x[k];
            const CMatrix& zk = zinv[k];
            for (std::size_t ti = 0; ti < terms.size(); ++ti) {
                for (std::size_t tj = ti; tj < terms.size(); ++tj) {
                    Complex acc = 0.0;
                    for (const auto& a : terms[ti].entries)
                        for (const auto& c : terms[tj].entries)
                            acc += a.value * c.value * xk(a.col, c.row) * zk(c.col, a.row);
                    const auto i = static_cast<Eigen::Index>(terms[ti].var);
                    const auto j = static_cast<Eigen::Index>(terms[tj].var);
                    // Re Tr(A_i X A_j Z^-1) is symmetric in (i, j) for Hermitian data.
                    s(i, j) += acc.real();
                    if (ti != tj) s(j, i) += acc.real();
                }
            }
        }
        return s;
    }
};

double inner(const Blocks& a, const Blocks& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += real_trace_product(a[k], b[k]);
    return acc;
}

double frobenius(const Blocks& a) {
    double acc = 0.0;
    for (const auto& m : a) acc += m.squaredNorm();
    return std::sqrt(acc);
}

double max_step(const CMatrix& x, const CMatrix& dx) {
    Eigen::LLT<CMatrix> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const CMatrix t = llt.matrixL().solve(dx);
    const CMatrix s = llt.matrixL().solve(t.adjoint());
    const double lmin = min_eigenvalue(s);
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

double max_step(const Blocks& x, const Blocks& dx) {
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < x.size(); ++k) step = std::min(step, max_step(x[k], dx[k]));
    return step;
}

struct Newton {
    RVector dy;
    RVector dw;
    Blocks dx;
    Blocks dz;
};

}  // namespace

ConicSolution solve_conic(const ConicProblem& problem, const SolverOptions& options) {
    problem.validate();
    const Workspace ws(problem);
    const auto m = static_cast<Eigen::Index>(ws.m);
    const auto q = static_cast<Eigen::Index>(ws.q);
    const std::size_t nb = problem.blocks.size();
    const RVector& b = problem.objective;
    const Eigen::MatrixXd& E = ws.equality_matrix;
    const RVector& f = ws.equality_rhs;

    Blocks c;
    for (const auto& blk : problem.blocks) c.push_back(hermitian_part(blk.constant));
    const double norm_b = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
    const double norm_c = frobenius(c);

    // Starting point: scaled identities.
    Blocks x, z;
    for (std::size_t k = 0; k < nb; ++k) {
        const auto& blk = problem.blocks[k];
        const double n = static_cast<double>(blk.dim);
        double xi = std::max(10.0, std::sqrt(n));
        double zeta = std::max({10.0, std::sqrt(n), c[k].norm()});
        for (const auto& term : blk.terms) {
            double na = 0.0;
            for (const auto& e : term.entries) na += std::norm(e.value);
            na = std::sqrt(na);
            xi = std::max(xi, n * (1.0 + std::abs(b(static_cast<Eigen::Index>(term.var)))) / (1.0 + na));
            zeta = std::max(zeta, na);
        }
        x.push_back(xi * CMatrix::Identity(blk.dim, blk.dim));
        z.push_back(zeta * CMatrix::Identity(blk.dim, blk.dim));
    }
    RVector y = RVector::Zero(m);
    RVector w = RVector::Zero(q);

    ConicSolution best;
    double best_merit = std::numeric_limits<double>::infinity();
    RVector best_y = y, best_w = w;
    Blocks best_x = x;
    int stalled = 0;
    int iter = 0;
    SolverStatus status = SolverStatus::IterationLimit;

    for (; iter <= options.max_iterations; ++iter) {
        const Blocks ay = ws.adjoint(y);
        Blocks rd(nb);
        for (std::size_t k = 0; k < nb; ++k) rd[k] = c[k] - z[k] - ay[k];
        const RVector ax = ws.forward(x);
        const RVector rp = b - ax - (q ? RVector(E.transpose() * w) : RVector::Zero(m));
        const RVector rf = q ? RVector(f - E * y) : RVector();
        const double mu = inner(x, z) / ws.total_dim;
        const double pobj = b.dot(y);
        const double dobj = inner(c, x) + (q ? f.dot(w) : 0.0);

        const double rel_gap = std::abs(dobj - pobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double pinf = (rp.size() ? rp.cwiseAbs().maxCoeff() : 0.0) / (1.0 + norm_b);
        const double dinf = (frobenius(rd) + (q ? rf.cwiseAbs().maxCoeff() : 0.0)) / (1.0 + norm_c);
        const double merit = std::max({rel_gap, pinf, dinf});
        if (merit < best_merit) {
            best_merit = merit;
            best_y = y;
            best_w = w;
            best_x = x;
        }
        if (rel_gap < options.gap_tol && pinf < options.feasibility_tol && dinf < options.feasibility_tol) {
            status = SolverStatus::Optimal;
            break;
        }

        // Infeasibility of the LMI side: X >= 0 with A(X) + E^T w ~ 0 and <C,X> + f^T w < 0.
        const double t = -dobj;
        if (t > 0.0) {
            const RVector homog = ax + (q ? RVector(E.transpose() * w) : RVector::Zero(m));
            const double res = homog.size() ? homog.cwiseAbs().maxCoeff() : 0.0;
            if (res < 1e-8 * t && t > 1e6 * (1.0 + norm_b)) {
                status = SolverStatus::Infeasible;
                break;
            }
        }
        // Unboundedness: b^T y grows along a direction with -A*(y) >= 0 and E y = 0.
        if (pobj > 1e8 * (1.0 + norm_c)) {
            status = SolverStatus::Unbounded;
            break;
        }

        Blocks zinv(nb);
        bool ok = true;
        for (std::size_t k = 0; k < nb; ++k) {
            Eigen::LLT<CMatrix> llt(z[k]);
            if (llt.info() != Eigen::Success) {
                ok = false;
                break;
            }
            zinv[k] = llt.solve(CMatrix::Identity(z[k].rows(), z[k].cols()));
            zinv[k] = hermitian_part(zinv[k]);
        }
        if (!ok) {
            status = SolverStatus::NumericalFailure;
            break;
        }

        Eigen::MatrixXd schur = ws.schur(x, zinv);
        Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
        if (schur_llt.info() != Eigen::Success) {
            const double reg = 1e-13 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
            schur.diagonal().array() += reg;
            schur_llt.compute(schur);
            if (schur_llt.info() != Eigen::Success) {
                status = SolverStatus::NumericalFailure;
                break;
            }
        }
        // Reduced system for the equality multipliers: (E M^-1 E^T) dw = E M^-1 h - rf.
        Eigen::MatrixXd minv_et;
        Eigen::LDLT<Eigen::MatrixXd> eq_ldlt;
        if (q) {
            minv_et = schur_llt.solve(E.transpose());
            eq_ldlt.compute(E * minv_et);
        }

        auto solve_direction = [&](const Blocks& rc) {
            Newton step;
            Blocks g(nb);
            for (std::size_t k = 0; k < nb; ++k) g[k] = (rc[k] - x[k] * rd[k]) * zinv[k];
            const RVector h = rp - ws.forward(g);
            if (q) {
                const RVector minv_h = schur_llt.solve(h);
                step.dw = eq_ldlt.solve(E * minv_h - rf);
                step.dy = minv_h - minv_et * step.dw;
            } else {
                step.dy = schur_llt.solve(h);
                step.dw = RVector();
            }
            const Blocks ady = ws.adjoint(step.dy);
            step.dz.resize(nb);
            step.dx.resize(nb);
            for (std::size_t k = 0; k < nb; ++k) {
                step.dz[k] = hermitian_part(rd[k] - ady[k]);
                step.dx[k] = hermitian_part((rc[k] - x[k] * step.dz[k]) * zinv[k]);
            }
            return step;
        };

        // Predictor (affine scaling).
        Blocks rc(nb);
        for (std::size_t k = 0; k < nb; ++k) rc[k] = -x[k] * z[k];
        const Newton pred = solve_direction(rc);
        const double ap_pred = std::min(1.0, max_step(x, pred.dx));
        const double ad_pred = std::min(1.0, max_step(z, pred.dz));
        Blocks xa(nb), za(nb);
        for (std::size_t k = 0; k < nb; ++k) {
            xa[k] = x[k] + ap_pred * pred.dx[k];
            za[k] = z[k] + ad_pred * pred.dz[k];
        }
        const double mu_aff = inner(xa, za) / ws.total_dim;
        const double ratio = mu > 0.0 ? std::max(0.0, mu_aff / mu) : 0.0;
        const double expon = std::max(1.0, 3.0 * std::pow(std::min(ap_pred, ad_pred), 2));
        const double sigma = std::min(1.0, std::pow(ratio, expon));

        // Corrector.
        for (std::size_t k = 0; k < nb; ++k) {
            rc[k] = sigma * mu * CMatrix::Identity(x[k].rows(), x[k].cols()) - x[k] * z[k] -
                    pred.dx[k] * pred.dz[k];
        }
        const Newton corr = solve_direction(rc);
        const double gamma = 0.9 + 0.09 * std::min(ap_pred, ad_pred);
        const double ap = std::min(1.0, gamma * max_step(x, corr.dx));
        const double ad = std::min(1.0, gamma * max_step(z, corr.dz));
        if (!std::isfinite(ap) || !std::isfinite(ad)) {
            status = SolverStatus::NumericalFailure;
            break;
        }

        for (std::size_t k = 0; k < nb; ++k) {
            x[k] = hermitian_part(x[k] + ap * corr.dx[k]);
            z[k] = hermitian_part(z[k] + ad * corr.dz[k]);
        }
        y += ad * corr.dy;
        if (q) w += ap * corr.dw;

        stalled = (ap < 1e-8 && ad < 1e-8) ? stalled + 1 : 0;
        if (stalled >= 3) {
            status = SolverStatus::NumericalFailure;
            break;
        }
    }

    // Report the best iterate, with the slack recomputed exactly from y.
    ConicSolution sol;
    sol.iterations = iter;
    if (status == SolverStatus::Infeasible || status == SolverStatus::Unbounded) {
        best_y = y;
        best_w = w;
        best_x = x;
    }
    sol.y = best_y;
    sol.equality_multipliers = best_w;
    const Blocks ay = ws.adjoint(best_y);
    double lmi_violation = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
        sol.slack.push_back(hermitian_part(c[k] - ay[k]));
        lmi_violation = std::max(lmi_violation, -min_eigenvalue(sol.slack.back()));
        sol.multipliers.push_back(hermitian_part(best_x[k]));
    }
    const double eq_violation =
        q ? (E * best_y - f).cwiseAbs().maxCoeff() : 0.0;
    sol.primal_residual = std::max({0.0, lmi_violation, eq_violation});
    const RVector rp = b - ws.forward(sol.multipliers) -
                       (q ? RVector(E.transpose() * best_w) : RVector::Zero(m));
    sol.dual_residual = rp.size() ? rp.cwiseAbs().maxCoeff() : 0.0;
    sol.primal_value = b.dot(best_y);
    sol.dual_value = inner(c, sol.multipliers) + (q ? f.dot(best_w) : 0.0);
    sol.gap = std::abs(sol.dual_value - sol.primal_value);

    std::ostringstream diag;
    diag << " after " << iter << " iterations (gap " << sol.gap << ", primal residual "
         << sol.primal_residual << ", dual residual " << sol.dual_residual << ")";
    if (status == SolverStatus::Infeasible) {
        sol.status = status;
        throw SolverError("conic problem is infeasible: dual ray found" + diag.str(), sol);
    }
    if (status == SolverStatus::Unbounded) {
        sol.status = status;
        throw SolverError("conic problem is unbounded" + diag.str(), sol);
    }
    if (sol.gap <= options.accept_gap && sol.primal_residual <= options.accept_residual &&
        sol.dual_residual <= options.accept_residual) {
        sol.status = SolverStatus::Optimal;
        return sol;
    }
    sol.status = status == SolverStatus::Optimal ? SolverStatus::NumericalFailure : status;
    throw SolverError("conic solver did not converge: " + to_string(sol.status) + diag.str(), sol);
}

}  // namespace hdsteer
