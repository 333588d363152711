#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "adlm/problem.hpp"
#include "adlm/rng.hpp"

namespace adlm {

enum class AssumptionProfile { Prop1Unconstrained, Prop2Constrained, Prop3Admm, Corollary2Scalar };

inline const char* to_string(AssumptionProfile p) {
    switch (p) {
        case AssumptionProfile::Prop1Unconstrained: return "prop1-unconstrained";
        case AssumptionProfile::Prop2Constrained: return "prop2-constrained";
        case AssumptionProfile::Prop3Admm: return "prop3-admm";
        case AssumptionProfile::Corollary2Scalar: return "corollary2-scalar";
    }
    return "?";
}

enum class CheckMethod { Exact, Sampled, Informational };

inline const char* to_string(CheckMethod m) {
    switch (m) {
        case CheckMethod::Exact: return "exact";
        case CheckMethod::Sampled: return "sampled, not proven";
        case CheckMethod::Informational: return "informational";
    }
    return "?";
}

struct AssumptionCheck {
    std::string name;
    CheckMethod method = CheckMethod::Exact;
    bool passed = false;
    std::string detail;
};

struct AssumptionReport {
    AssumptionProfile profile;
    std::vector<AssumptionCheck> checks;

    /// True when every exact and sampled check passed (informational checks
    /// never fail).
    bool all_passed() const {
        for (const auto& c : checks)
            if (c.method != CheckMethod::Informational && !c.passed) return false;
        return true;
    }

    const AssumptionCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct SamplingOptions {
    double box_halfwidth = 10.0;  // sampling box [-w, w]^dim
    int samples = 10000;
};

namespace detail {

inline bool is_identity(const Matrix& M) {
    if (M.rows() != M.cols()) return false;
    return (M - Matrix::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff() == 0.0;
}

inline bool full_column_rank(const Matrix& M) {
    if (M.rows() < M.cols()) return false;
    Eigen::ColPivHouseholderQR<Matrix> qr(M);
    return qr.rank() == M.cols();
}

inline double inf_norm(const Matrix& M) {
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline void add(AssumptionReport& r, std::string name, CheckMethod m, bool ok, std::string detail) {
    r.checks.push_back(AssumptionCheck{std::move(name), m, ok, std::move(detail)});
}

// Sampled gradient statistics over the box: max norm in the box and in the
// doubled box, and the Assumption 2.b sign pattern with threshold c.
struct GradientScan {
    double max_norm = 0.0;
    double max_norm_outer = 0.0;
    bool sign_ok = true;
    double sign_threshold = 0.0;
};

inline GradientScan scan_gradient(const ObjectiveBlock& f, const SamplingOptions& opt) {
    GradientScan scan;
    scan.sign_threshold = 0.5 * opt.box_halfwidth;
    const Index n = f.dimension();
    QuasiRandomSequence seq(static_cast<int>(n));
    std::vector<double> pt(static_cast<std::size_t>(n));
    Vector x(n);
    for (int s = 0; s < opt.samples; ++s) {
        seq.next(pt.data());
        for (Index i = 0; i < n; ++i) x[i] = (2.0 * pt[static_cast<std::size_t>(i)] - 1.0) * opt.box_halfwidth;
        Vector g = f.gradient(x);
        scan.max_norm = std::max(scan.max_norm, g.norm());
        for (Index i = 0; i < n; ++i) {
            if (x[i] < -scan.sign_threshold && !(g[i] < 0.0)) scan.sign_ok = false;
            if (x[i] > scan.sign_threshold && !(g[i] > 0.0)) scan.sign_ok = false;
        }
        Vector x2 = 2.0 * x;
        scan.max_norm_outer = std::max(scan.max_norm_outer, f.gradient(x2).norm());
    }
    return scan;
}

}  // namespace detail

/// Checks the assumption set behind the requested convergence statement.
/// Structural facts (zero objective, identity coupling, ranks, set forms)
/// are verified exactly; analytic facts (bounded gradients, sign patterns,
/// Lipschitz constants) use the analytic registry where available and
/// otherwise documented sampling over `opt`'s box, labeled as such.
inline AssumptionReport validate_assumptions(const StructuredProblem& p, AssumptionProfile profile,
                                             const SamplingOptions& opt = {}) {
    AssumptionReport report;
    report.profile = profile;

    switch (profile) {
        case AssumptionProfile::Prop1Unconstrained: {
            detail::add(report, "A1.g-zero", CheckMethod::Exact, p.g.is_zero(),
                        std::string("g kind: ") + to_string(p.g.kind()));
            detail::add(report, "A1.A-identity", CheckMethod::Exact, detail::is_identity(p.A), "");
            detail::add(report, "A1.c-zero", CheckMethod::Exact,
                        p.c.size() == 0 || p.c.cwiseAbs().maxCoeff() == 0.0, "");
            detail::add(report, "A1.B-full-column-rank", CheckMethod::Exact,
                        detail::full_column_rank(p.B), "rank-revealing QR");
            detail::add(report, "A1.sets-whole-space", CheckMethod::Exact,
                        p.X.form() == SetForm::WholeSpace && p.Z.form() == SetForm::WholeSpace, "");

            // Assumption 2: either (a) bounded gradient or (b) the infinity
            // norm conditions plus the sign pattern.
            auto bound = p.f.gradient_bound();
            if (bound) {
                detail::add(report, "A2a.bounded-gradient", CheckMethod::Exact, true,
                            "analytic bound " + detail::fmt(*bound));
            } else {
                auto scan = detail::scan_gradient(p.f, opt);
                bool growing = scan.max_norm_outer > 1.5 * scan.max_norm;
                detail::add(report, "A2a.bounded-gradient", CheckMethod::Sampled, !growing,
                            "max ||grad f|| " + detail::fmt(scan.max_norm) + " on the box, " +
                                detail::fmt(scan.max_norm_outer) + " on the doubled box");
            }
            double b_inf = detail::inf_norm(p.B);
            detail::add(report, "A2b.B-inf-norm", CheckMethod::Exact, b_inf <= 1.0 + 1e-12,
                        "||B||_inf = " + detail::fmt(b_inf));
            bool pseudo_ok = false;
            double pinv_inf = std::numeric_limits<double>::infinity();
            if (detail::full_column_rank(p.B)) {
                Matrix pinv = (p.B.transpose() * p.B).ldlt().solve(p.B.transpose());
                pinv_inf = detail::inf_norm(pinv);
                pseudo_ok = pinv_inf <= 1.0 + 1e-12;
            }
            detail::add(report, "A2b.pseudoinverse-inf-norm", CheckMethod::Exact, pseudo_ok,
                        "||(B'B)^-1 B'||_inf = " + detail::fmt(pinv_inf));
            {
                auto scan = detail::scan_gradient(p.f, opt);
                detail::add(report, "A2b.gradient-sign-pattern", CheckMethod::Sampled, scan.sign_ok,
                            detail::fmt(opt.samples) + " quasi-random points in [-" +
                                detail::fmt(opt.box_halfwidth) + "," + detail::fmt(opt.box_halfwidth) +
                                "]^dim, threshold c = " + detail::fmt(0.5 * opt.box_halfwidth));
            }
            break;
        }

        case AssumptionProfile::Prop2Constrained: {
            detail::add(report, "A3.objectives-C1", CheckMethod::Exact, true,
                        "all builtin blocks are continuously differentiable");
            Tri cx = p.X.convex(), cz = p.Z.convex();
            detail::add(report, "A4.X-convex", CheckMethod::Exact, cx == Tri::Yes,
                        std::string(to_string(cx)) + " (" + to_string(p.X.form()) + ")");
            detail::add(report, "A4.Z-convex", CheckMethod::Exact, cz == Tri::Yes,
                        std::string(to_string(cz)) + " (" + to_string(p.Z.form()) + ")");
            detail::add(report, "A4.X-compact", CheckMethod::Exact, p.X.compact() == Tri::Yes, "");
            detail::add(report, "A4.Z-compact", CheckMethod::Exact, p.Z.compact() == Tri::Yes, "");
            detail::add(report, "A5.X-slater", CheckMethod::Exact,
                        p.X.strictly_feasible_point_exists() == Tri::Yes, "");
            detail::add(report, "A5.Z-slater", CheckMethod::Exact,
                        p.Z.strictly_feasible_point_exists() == Tri::Yes, "");
            detail::add(report, "A6.A-full-column-rank", CheckMethod::Exact,
                        detail::full_column_rank(p.A), "");
            detail::add(report, "A6.B-full-column-rank", CheckMethod::Exact,
                        detail::full_column_rank(p.B), "");
            break;
        }

        case AssumptionProfile::Prop3Admm: {
            FunctionalForm fx = p.X.to_functional();
            FunctionalForm fz = p.Z.to_functional();
            detail::add(report, "A7.sets-functional", CheckMethod::Exact, true,
                        "(q1,q2) = (" + std::to_string(fx.equalities.size()) + "," +
                            std::to_string(fx.inequalities.size()) + "), (q3,q4) = (" +
                            std::to_string(fz.equalities.size()) + "," +
                            std::to_string(fz.inequalities.size()) + ")");
            detail::add(report, "A7.objectives-C1", CheckMethod::Exact, true, "");
            detail::add(report, "A8.subproblem-optimality", CheckMethod::Informational, true,
                        "ensured by the solver policy, not checkable from the problem alone");
            detail::add(report, "A9.regularity", CheckMethod::Informational, true,
                        "checked per point by FON certificates (rank of active gradients)");
            break;
        }

        case AssumptionProfile::Corollary2Scalar: {
            bool scalar = p.x_dim() == 1 && p.z_dim() == 1 && p.coupling_dim() == 1;
            detail::add(report, "A10.scalar", CheckMethod::Exact, scalar, "");
            bool coupling_ok = scalar && p.A(0, 0) == 1.0 && p.B(0, 0) == -1.0 && p.c[0] == 0.0;
            detail::add(report, "A10.coupling-x-equals-z", CheckMethod::Exact, coupling_ok,
                        "requires A = 1, B = -1, c = 0");
            bool sets_ok = p.X.form() == SetForm::WholeSpace && p.Z.form() == SetForm::WholeSpace;
            detail::add(report, "A10.sets-whole-space", CheckMethod::Exact, sets_ok, "");
            auto lf = p.f.gradient_lipschitz();
            auto lg = p.g.gradient_lipschitz();
            if (lf && lg) {
                double L = std::max(*lf, *lg);
                detail::add(report, "A10.lipschitz-derivatives", CheckMethod::Exact, true,
                            "L = " + detail::fmt(L));
            } else {
                detail::add(report, "A10.lipschitz-derivatives", CheckMethod::Exact, false,
                            "no analytic Lipschitz constant for this block pair");
            }
            break;
        }
    }
    return report;
}

}  // namespace adlm
