#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>

#include "adlm/assumptions.hpp"
#include "adlm/trace.hpp"

namespace adlm {

/// Penalty sequence rho(t): constant rho0; linear rho0 + slope t; geometric
/// rho0 * Delta^floor(t / kappa).
class PenaltySchedule {
public:
    enum class Kind { Constant, Linear, Geometric };

    static PenaltySchedule constant(double rho) {
        if (rho <= 0.0) throw std::invalid_argument("penalty schedule: rho0 must be positive");
        PenaltySchedule s;
        s.kind_ = Kind::Constant;
        s.rho0_ = rho;
        return s;
    }

    static PenaltySchedule linear(double rho0, double slope) {
        if (rho0 <= 0.0 || slope <= 0.0)
            throw std::invalid_argument("penalty schedule: linear needs rho0 > 0 and slope > 0");
        PenaltySchedule s;
        s.kind_ = Kind::Linear;
        s.rho0_ = rho0;
        s.slope_ = slope;
        return s;
    }

    static PenaltySchedule geometric(double rho0, double delta, int kappa) {
        if (rho0 <= 0.0 || delta <= 1.0 || kappa < 1)
            throw std::invalid_argument(
                "penalty schedule: geometric needs rho0 > 0, Delta > 1, kappa >= 1");
        PenaltySchedule s;
        s.kind_ = Kind::Geometric;
        s.rho0_ = rho0;
        s.delta_ = delta;
        s.kappa_ = kappa;
        return s;
    }

    double at(int t) const {
        switch (kind_) {
            case Kind::Constant: return rho0_;
            case Kind::Linear: return rho0_ + slope_ * t;
            case Kind::Geometric: return rho0_ * std::pow(delta_, t / kappa_);
        }
        return rho0_;
    }

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant; }

    std::string describe() const {
        char buf[96];
        switch (kind_) {
            case Kind::Constant: std::snprintf(buf, sizeof(buf), "constant(%g)", rho0_); break;
            case Kind::Linear: std::snprintf(buf, sizeof(buf), "linear(%g,%g)", rho0_, slope_); break;
            case Kind::Geometric:
                std::snprintf(buf, sizeof(buf), "geometric(%g,%g,%d)", rho0_, delta_, kappa_);
                break;
        }
        return buf;
    }

private:
    Kind kind_ = Kind::Constant;
    double rho0_ = 1.0;
    double slope_ = 0.0;
    double delta_ = 2.0;
    int kappa_ = 1;
};

/// Multiplier update rule for the penalty loops: keep y at zero, run the
/// multiplier recursion, or run it clipped onto the ball of radius `bound`.
struct DualPolicy {
    enum class Kind { Zero, MultiplierRecursion, BoundedRecursion };
    Kind kind = Kind::Zero;
    double bound = 0.0;

    static DualPolicy zero() { return DualPolicy{Kind::Zero, 0.0}; }
    static DualPolicy multiplier_recursion() { return DualPolicy{Kind::MultiplierRecursion, 0.0}; }
    static DualPolicy bounded_recursion(double m0) {
        if (m0 <= 0.0) throw std::invalid_argument("dual policy: bound must be positive");
        return DualPolicy{Kind::BoundedRecursion, m0};
    }

    std::string describe() const {
        switch (kind) {
            case Kind::Zero: return "zero";
            case Kind::MultiplierRecursion: return "multiplier-recursion";
            case Kind::BoundedRecursion: {
                char buf[48];
                std::snprintf(buf, sizeof(buf), "bounded-recursion(%g)", bound);
                return buf;
            }
        }
        return "?";
    }
};

namespace detail {

struct LoopWorkspace {
    Matrix At, Bt, AtA, BtB;

    explicit LoopWorkspace(const StructuredProblem& p)
        : At(p.A.transpose()), Bt(p.B.transpose()), AtA(At * p.A), BtB(Bt * p.B) {}
};

inline SubproblemSpec x_update_spec(const StructuredProblem& p, const LoopWorkspace& ws,
                                    const Vector& z, const Vector& y, double rho,
                                    const Vector& warm) {
    return SubproblemSpec{p.f, ws.At * (y + rho * (p.B * z - p.c)), rho * ws.AtA, p.X, warm};
}

inline SubproblemSpec z_update_spec(const StructuredProblem& p, const LoopWorkspace& ws,
                                    const Vector& x, const Vector& y, double rho,
                                    const Vector& warm) {
    return SubproblemSpec{p.g, ws.Bt * (y + rho * (p.A * x - p.c)), rho * ws.BtB, p.Z, warm};
}

// Stationarity measure recorded in traces: the norm of the unit-step
// projected-gradient mapping of the augmented Lagrangian (the plain gradient
// norm on non-projectable sets).
inline double stationarity_measure(const StructuredProblem& p, const PrimalDualPoint& pt) {
    Vector gx = grad_aug_lagrangian(p, pt, VariableBlock::X);
    Vector gz = grad_aug_lagrangian(p, pt, VariableBlock::Z);
    double rx = p.X.projectable() ? (pt.x - p.X.project(pt.x - gx)).norm() : gx.norm();
    double rz = p.Z.projectable() ? (pt.z - p.Z.project(pt.z - gz)).norm() : gz.norm();
    return std::sqrt(rx * rx + rz * rz);
}

inline TraceRecord make_record(const StructuredProblem& p, int t, double rho, const Vector& x,
                               const Vector& z, const Vector& y, double dual_step) {
    TraceRecord r;
    r.t = t;
    r.rho = rho;
    r.x = x;
    r.z = z;
    r.y = y;
    r.primal_residual = eval_primal_residual(p, x, z);
    r.stationarity = stationarity_measure(p, PrimalDualPoint{x, z, y, rho});
    r.objective = eval_objective(p, x, z);
    r.dual_step = dual_step;
    return r;
}

inline bool iterates_out_of_bounds(const Vector& x, const Vector& z, double bound) {
    if (!x.allFinite() || !z.allFinite()) return true;
    return x.norm() > bound || z.norm() > bound;
}

// Joint (x, z)-update of the centralized baselines: a stacked closed-form
// solve when both blocks are quadratic on the whole space, a stacked grid
// search when the product set is bounded and small, and otherwise an inner
// alternating loop run to stationarity (max 100 sweeps).
// x'Qx + q'x form of a block when it has one (constants are irrelevant to
// the argmin): zero and quadratic blocks directly, 1-d polynomials of degree
// at most two by coefficient reading.
inline std::optional<std::pair<Matrix, Vector>> as_quadratic_form(const ObjectiveBlock& b) {
    if (b.kind() == BlockKind::Zero)
        return std::make_pair(Matrix(Matrix::Zero(b.dimension(), b.dimension())),
                              Vector(Vector::Zero(b.dimension())));
    if (b.kind() == BlockKind::Quadratic) {
        const auto& q = std::get<QuadraticData>(b.data());
        return std::make_pair(q.Q, q.q);
    }
    if (b.kind() == BlockKind::Polynomial1d) {
        const auto& coeffs = std::get<PolynomialData>(b.data()).coeffs;
        if (coeffs.size() <= 3)
            return std::make_pair(
                Matrix(Matrix::Constant(1, 1, coeffs.size() == 3 ? coeffs[2] : 0.0)),
                Vector(Vector::Constant(1, coeffs.size() >= 2 ? coeffs[1] : 0.0)));
    }
    return std::nullopt;
}

inline std::pair<BlockSolution, BlockSolution> joint_update(const StructuredProblem& p,
                                                            const LoopWorkspace& ws, Vector& x,
                                                            Vector& z, const Vector& y, double rho,
                                                            const SolverPolicy& policy) {
    const Index p1 = p.x_dim(), p2 = p.z_dim();
    const bool whole = p.X.form() == SetForm::WholeSpace && p.Z.form() == SetForm::WholeSpace;
    auto quad_f = as_quadratic_form(p.f);
    auto quad_g = as_quadratic_form(p.g);
    const bool quad_like = quad_f.has_value() && quad_g.has_value();

    Matrix M(p.coupling_dim(), p1 + p2);
    M.leftCols(p1) = p.A;
    M.rightCols(p2) = p.B;
    Vector w = M.transpose() * (y - rho * p.c);
    Matrix P = rho * (M.transpose() * M);
    Vector warm(p1 + p2);
    warm.head(p1) = x;
    warm.tail(p2) = z;

    auto split = [&](const BlockSolution& sol) {
        x = sol.minimizer.head(p1);
        z = sol.minimizer.tail(p2);
        BlockSolution xs = sol, zs = sol;
        xs.minimizer = x;
        zs.minimizer = z;
        return std::make_pair(xs, zs);
    };

    if (whole && quad_like) {
        const auto& [Qf, qf] = *quad_f;
        const auto& [Qg, qg] = *quad_g;
        Matrix Q = Matrix::Zero(p1 + p2, p1 + p2);
        Q.topLeftCorner(p1, p1) = Qf;
        Q.bottomRightCorner(p2, p2) = Qg;
        Vector q(p1 + p2);
        q.head(p1) = qf;
        q.tail(p2) = qg;
        SubproblemSpec spec{ObjectiveBlock::quadratic(Q, q), w, P,
                            ConstraintSet::whole_space(p1 + p2), warm};
        return split(solve_block(spec, policy));
    }

    ObjectiveBlock stacked = ObjectiveBlock::sum(
        {p.f, p.g}, [&] {
            std::vector<std::vector<Index>> maps(2);
            for (Index i = 0; i < p1; ++i) maps[0].push_back(i);
            for (Index i = 0; i < p2; ++i) maps[1].push_back(p1 + i);
            return maps;
        }());
    ConstraintSet product = ConstraintSet::product({p.X, p.Z});

    if (p1 + p2 <= 3 && product.bounded() && product.projectable()) {
        SubproblemSpec spec{stacked, w, P, product, warm};
        SolverPolicy grid_policy = policy;
        grid_policy.strategy = SolveStrategy::GridGlobal;
        return split(solve_block(spec, grid_policy));
    }

    // alternating inner loop to stationarity; the result is local
    const double inner_tol = policy.tol > 0.0 ? policy.tol : 1e-8;
    BlockSolution xs, zs;
    xs.minimizer = x;
    zs.minimizer = z;
    for (int sweep = 0; sweep < 100; ++sweep) {
        Vector x_prev = x, z_prev = z;
        xs = solve_block(x_update_spec(p, ws, z, y, rho, x), policy);
        x = xs.minimizer;
        zs = solve_block(z_update_spec(p, ws, x, y, rho, z), policy);
        z = zs.minimizer;
        double move = std::max((x - x_prev).norm(), (z - z_prev).norm());
        if (move <= inner_tol) break;
    }
    xs.status = SolveStatus::Local;
    zs.status = SolveStatus::Local;
    xs.minimizer = x;
    zs.minimizer = z;
    return {xs, zs};
}

}  // namespace detail

/// Alternating Direction Penalty Method: alternating block minimization of
/// the augmented Lagrangian under a divergent penalty schedule, with the
/// multiplier either held at zero or updated by a clipped recursion.
/// Converged means the coupling residual and the iterate step both fell
/// below the stop rule.
inline IterationTrace run_adpm(const StructuredProblem& p, const PenaltySchedule& schedule,
                               const DualPolicy& dual, Vector z0, Vector y0,
                               const SolverPolicy& policy, const StopRule& stop) {
    stop.validate();
    if (schedule.is_constant())
        throw std::invalid_argument("run_adpm: a constant schedule is ADMM, not ADPM");
    if (dual.kind == DualPolicy::Kind::MultiplierRecursion)
        throw std::invalid_argument(
            "run_adpm: the unclipped multiplier recursion is not admitted; use zero or "
            "bounded-recursion");
    if (z0.size() != p.z_dim()) throw std::invalid_argument("run_adpm: z0 dimension mismatch");
    if (y0.size() != p.coupling_dim()) throw std::invalid_argument("run_adpm: y0 dimension mismatch");

    detail::LoopWorkspace ws(p);
    IterationTrace trace;
    trace.algorithm = "adpm";
    trace.penalty_description = schedule.describe();
    trace.dual_policy_description = dual.describe();
    trace.notes = schedule.kind() == PenaltySchedule::Kind::Geometric
                      ? "geometric growth: feasibility guarantee regime"
                      : "divergent non-summable schedule: unconstrained FON regime";

    Vector x = Vector::Zero(p.x_dim());
    Vector z = std::move(z0);
    Vector y = dual.kind == DualPolicy::Kind::Zero ? Vector(Vector::Zero(p.coupling_dim()))
                                                   : std::move(y0);

    trace.records.push_back(detail::make_record(p, 0, schedule.at(0), x, z, y, 0.0));
    for (int t = 0; t < stop.max_iters; ++t) {
        const double rho = schedule.at(t);
        Vector x_prev = x, z_prev = z;

        auto xs = solve_block(detail::x_update_spec(p, ws, z, y, rho, x), policy);
        x = xs.minimizer;
        auto zs = solve_block(detail::z_update_spec(p, ws, x, y, rho, z), policy);
        z = zs.minimizer;

        double dual_step = 0.0;
        if (dual.kind == DualPolicy::Kind::BoundedRecursion) {
            Vector y_new = y + rho * coupling_residual(p, x, z);
            double n = y_new.norm();
            if (n > dual.bound) y_new *= dual.bound / n;  // project onto the M0 ball
            dual_step = (y_new - y).norm();
            y = y_new;
        }

        auto rec = detail::make_record(p, t + 1, schedule.at(t + 1), x, z, y, dual_step);
        rec.x_status = xs.status;
        rec.z_status = zs.status;
        rec.x_grid = xs.via_grid;
        rec.z_grid = zs.via_grid;
        trace.records.push_back(std::move(rec));

        if (detail::iterates_out_of_bounds(x, z, stop.divergence_bound)) {
            trace.verdict = Verdict::Diverged;
            return trace;
        }
        double step = std::sqrt((x - x_prev).squaredNorm() + (z - z_prev).squaredNorm());
        if (trace.records.back().primal_residual <= stop.primal_tol && step <= stop.step_tol) {
            trace.verdict = Verdict::Converged;
            return trace;
        }
    }
    trace.verdict = Verdict::MaxIters;
    return trace;
}

/// Alternating Direction Method of Multipliers at fixed rho. Converged means
/// the dual step, the coupling residual, and the primal step all fell below
/// the stop rule; the trace then carries a FON certificate evaluated at the
/// last iterate. (The primal-step condition matters for piecewise-linear
/// derivatives, where the residual and dual step can vanish exactly while
/// the iterates still march.)
inline IterationTrace run_admm(const StructuredProblem& p, double rho, Vector z0, Vector y0,
                               const SolverPolicy& policy, const StopRule& stop,
                               double fon_tol = 1e-6) {
    stop.validate();
    if (rho <= 0.0) throw std::invalid_argument("run_admm: rho must be positive");
    if (z0.size() != p.z_dim()) throw std::invalid_argument("run_admm: z0 dimension mismatch");
    if (y0.size() != p.coupling_dim()) throw std::invalid_argument("run_admm: y0 dimension mismatch");

    detail::LoopWorkspace ws(p);
    IterationTrace trace;
    trace.algorithm = "admm";
    trace.penalty_description = PenaltySchedule::constant(rho).describe();
    trace.dual_policy_description = "multiplier-recursion";

    Vector x = Vector::Zero(p.x_dim());
    Vector z = std::move(z0);
    Vector y = std::move(y0);

    trace.records.push_back(detail::make_record(p, 0, rho, x, z, y, 0.0));
    for (int t = 0; t < stop.max_iters; ++t) {
        Vector x_prev = x, z_prev = z;
        auto xs = solve_block(detail::x_update_spec(p, ws, z, y, rho, x), policy);
        x = xs.minimizer;
        auto zs = solve_block(detail::z_update_spec(p, ws, x, y, rho, z), policy);
        z = zs.minimizer;

        Vector y_new = y + rho * coupling_residual(p, x, z);
        double dual_step = (y_new - y).norm();
        y = y_new;

        auto rec = detail::make_record(p, t + 1, rho, x, z, y, dual_step);
        rec.x_status = xs.status;
        rec.z_status = zs.status;
        rec.x_grid = xs.via_grid;
        rec.z_grid = zs.via_grid;
        trace.records.push_back(std::move(rec));

        if (detail::iterates_out_of_bounds(x, z, stop.divergence_bound)) {
            trace.verdict = Verdict::Diverged;
            return trace;
        }
        double primal_step = std::sqrt((x - x_prev).squaredNorm() + (z - z_prev).squaredNorm());
        if (dual_step <= stop.step_tol && primal_step <= stop.step_tol &&
            trace.records.back().primal_residual <= stop.primal_tol) {
            trace.verdict = Verdict::Converged;
            trace.fon = check_fon(p, PrimalDualPoint{x, z, y, rho}, fon_tol);
            return trace;
        }
    }
    trace.verdict = Verdict::MaxIters;
    return trace;
}

/// Quadratic penalty baseline: the joint (x, z)-update under a divergent
/// schedule with the multiplier frozen at y0.
inline IterationTrace run_quadratic_penalty(const StructuredProblem& p,
                                            const PenaltySchedule& schedule, Vector z0, Vector y0,
                                            const SolverPolicy& policy, const StopRule& stop) {
    stop.validate();
    if (schedule.is_constant())
        throw std::invalid_argument("run_quadratic_penalty: the schedule must diverge");
    if (z0.size() != p.z_dim() || y0.size() != p.coupling_dim())
        throw std::invalid_argument("run_quadratic_penalty: init dimension mismatch");

    detail::LoopWorkspace ws(p);
    IterationTrace trace;
    trace.algorithm = "qpm";
    trace.penalty_description = schedule.describe();
    trace.dual_policy_description = "fixed(y0)";

    Vector x = Vector::Zero(p.x_dim());
    Vector z = std::move(z0);
    const Vector y = std::move(y0);

    trace.records.push_back(detail::make_record(p, 0, schedule.at(0), x, z, y, 0.0));
    for (int t = 0; t < stop.max_iters; ++t) {
        const double rho = schedule.at(t);
        Vector x_prev = x, z_prev = z;
        auto [xs, zs] = detail::joint_update(p, ws, x, z, y, rho, policy);

        auto rec = detail::make_record(p, t + 1, schedule.at(t + 1), x, z, y, 0.0);
        rec.x_status = xs.status;
        rec.z_status = zs.status;
        rec.x_grid = xs.via_grid;
        rec.z_grid = zs.via_grid;
        trace.records.push_back(std::move(rec));

        if (detail::iterates_out_of_bounds(x, z, stop.divergence_bound)) {
            trace.verdict = Verdict::Diverged;
            return trace;
        }
        double step = std::sqrt((x - x_prev).squaredNorm() + (z - z_prev).squaredNorm());
        if (trace.records.back().primal_residual <= stop.primal_tol && step <= stop.step_tol) {
            trace.verdict = Verdict::Converged;
            return trace;
        }
    }
    trace.verdict = Verdict::MaxIters;
    return trace;
}

/// Method of multipliers baseline: the joint update at fixed rho plus the
/// multiplier recursion; convergence is judged like ADMM and finalized with
/// a FON certificate.
inline IterationTrace run_method_of_multipliers(const StructuredProblem& p, double rho, Vector z0,
                                                Vector y0, const SolverPolicy& policy,
                                                const StopRule& stop, double fon_tol = 1e-6) {
    stop.validate();
    if (rho <= 0.0) throw std::invalid_argument("run_method_of_multipliers: rho must be positive");
    if (z0.size() != p.z_dim() || y0.size() != p.coupling_dim())
        throw std::invalid_argument("run_method_of_multipliers: init dimension mismatch");

    detail::LoopWorkspace ws(p);
    IterationTrace trace;
    trace.algorithm = "mm";
    trace.penalty_description = PenaltySchedule::constant(rho).describe();
    trace.dual_policy_description = "multiplier-recursion";

    Vector x = Vector::Zero(p.x_dim());
    Vector z = std::move(z0);
    Vector y = std::move(y0);

    trace.records.push_back(detail::make_record(p, 0, rho, x, z, y, 0.0));
    for (int t = 0; t < stop.max_iters; ++t) {
        Vector x_prev = x, z_prev = z;
        auto [xs, zs] = detail::joint_update(p, ws, x, z, y, rho, policy);
        Vector y_new = y + rho * coupling_residual(p, x, z);
        double dual_step = (y_new - y).norm();
        y = y_new;

        auto rec = detail::make_record(p, t + 1, rho, x, z, y, dual_step);
        rec.x_status = xs.status;
        rec.z_status = zs.status;
        rec.x_grid = xs.via_grid;
        rec.z_grid = zs.via_grid;
        trace.records.push_back(std::move(rec));

        if (detail::iterates_out_of_bounds(x, z, stop.divergence_bound)) {
            trace.verdict = Verdict::Diverged;
            return trace;
        }
        double primal_step = std::sqrt((x - x_prev).squaredNorm() + (z - z_prev).squaredNorm());
        if (dual_step <= stop.step_tol && primal_step <= stop.step_tol &&
            trace.records.back().primal_residual <= stop.primal_tol) {
            trace.verdict = Verdict::Converged;
            trace.fon = check_fon(p, PrimalDualPoint{x, z, y, rho}, fon_tol);
            return trace;
        }
    }
    trace.verdict = Verdict::MaxIters;
    return trace;
}

/// Post-run diagnosis: did the dual iterates settle (tail window of 20
/// records), and if so, do the final iterates satisfy the first-order
/// conditions; plus how often the unconstrained-case residual bound
/// r(t+1) <= (M / rho(t)) (1 + ||B (B'B)^-1 B'||) held, when the problem has
/// the structure that makes it meaningful.
struct TraceDiagnosis {
    bool dual_converged = false;
    double tail_max_dual_step = 0.0;
    std::optional<FonCertificate> fon;
    std::optional<double> prop1_bound_ratio;
};

inline TraceDiagnosis diagnose_trace(const IterationTrace& trace, const StructuredProblem& p,
                                     double tol) {
    constexpr int kWindow = 20;
    TraceDiagnosis out;
    if (trace.records.empty()) return out;

    int n = static_cast<int>(trace.records.size());
    int start = std::max(1, n - kWindow);
    double worst = 0.0;
    for (int i = start; i < n; ++i) worst = std::max(worst, trace.records[i].dual_step);
    out.tail_max_dual_step = worst;
    out.dual_converged = worst <= tol && trace.verdict != Verdict::Diverged;

    if (out.dual_converged) {
        const auto& last = trace.records.back();
        out.fon = check_fon(p, PrimalDualPoint{last.x, last.z, last.y, std::max(last.rho, 1.0)}, tol);
    }

    const bool assumption1_structure =
        p.g.is_zero() && detail::is_identity(p.A) &&
        (p.c.size() == 0 || p.c.cwiseAbs().maxCoeff() == 0.0) && detail::full_column_rank(p.B) &&
        p.X.form() == SetForm::WholeSpace && p.Z.form() == SetForm::WholeSpace;
    if (assumption1_structure && trace.dual_policy_description == "zero" && n >= 2) {
        Matrix projector = p.B * (p.B.transpose() * p.B).ldlt().solve(p.B.transpose());
        Eigen::JacobiSVD<Matrix> svd(projector);
        double factor = 1.0 + svd.singularValues()[0];
        double max_grad = 0.0;
        for (int i = 1; i < n; ++i)
            max_grad = std::max(max_grad, p.f.gradient(trace.records[i].x).norm());
        int satisfied = 0;
        for (int i = 0; i + 1 < n; ++i) {
            double bound = max_grad / trace.records[i].rho * factor;
            if (trace.records[i + 1].primal_residual <= bound * (1.0 + 1e-9) + 1e-12) ++satisfied;
        }
        out.prop1_bound_ratio = static_cast<double>(satisfied) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace adlm
