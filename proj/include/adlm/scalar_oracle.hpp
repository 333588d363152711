#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "adlm/algorithms.hpp"

namespace adlm {

/// A scalar consensus instance x = z with 1-d objective blocks whose
/// derivatives have known Lipschitz constants. The dual variable is pinned
/// to g'(z0), which is the regime where the fixed point is fully
/// characterized by the sign of f' + g' at the start.
struct ScalarInstance {
    ObjectiveBlock f;
    ObjectiveBlock g;
    double lipschitz;  // max of the two derivative constants
    double z0;
    double rho;

    static ScalarInstance make(ObjectiveBlock f, ObjectiveBlock g, double z0, double rho) {
        if (f.dimension() != 1 || g.dimension() != 1)
            throw std::invalid_argument("scalar instance: blocks must be one-dimensional");
        auto lf = f.gradient_lipschitz();
        auto lg = g.gradient_lipschitz();
        if (!lf || !lg)
            throw std::invalid_argument(
                "scalar instance: both blocks need analytic Lipschitz constants");
        double L = std::max(*lf, *lg);
        if (!(rho > L))
            throw std::invalid_argument("scalar instance: requires rho > L (here L = " +
                                        std::to_string(L) + ")");
        return ScalarInstance{std::move(f), std::move(g), L, z0, rho};
    }

    double y0() const { return g.derivative(z0); }

    double slope_sum(double z) const { return f.derivative(z) + g.derivative(z); }

    StructuredProblem problem() const {
        return StructuredProblem(f, g, Matrix::Identity(1, 1), -Matrix::Identity(1, 1),
                                 Vector::Zero(1), ConstraintSet::whole_space(1),
                                 ConstraintSet::whole_space(1));
    }
};

enum class FixedPointCase { A, B, C };

inline const char* to_string(FixedPointCase c) {
    switch (c) {
        case FixedPointCase::A: return "a";
        case FixedPointCase::B: return "b";
        case FixedPointCase::C: return "c";
    }
    return "?";
}

/// Predicted limit of the scalar run: the nearest zero of f' + g' in the
/// descent direction from z0, or +-infinity when no zero exists within the
/// scan window.
struct FixedPointPrediction {
    FixedPointCase which = FixedPointCase::A;
    double zstar = 0.0;  // may be +-infinity
    std::optional<double> certificate;  // f'(z*) + g'(z*) when finite

    bool finite() const { return std::isfinite(zstar); }
};

namespace detail {

// Bisection refinement of a sign change of s on [lo, hi] down to a root with
// |s| <= 1e-10 (the certificate tolerance) or machine-width interval.
inline double refine_zero(const std::function<double(double)>& s, double lo, double hi) {
    double slo = s(lo);
    if (slo == 0.0) return lo;
    double shi = s(hi);
    if (shi == 0.0) return hi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double smid = s(mid);
        if (smid == 0.0 || hi - lo <= 1e-15 * (1.0 + std::abs(mid))) return mid;
        if ((smid < 0.0) == (slo < 0.0)) {
            lo = mid;
            slo = smid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Scans s(z) = f'(z) + g'(z) from z0 in the descent direction of f + g:
/// case a (|s(z0)| <= 1e-12) keeps z0; case b (s(z0) < 0) walks right to the
/// first sign change or grid zero; case c walks left. No zero within
/// `scan_bound` of z0 means divergence to the corresponding infinity.
/// A grid value with |s| <= 1e-12 counts as a zero; tangential zeros between
/// grid points are a documented limitation of the scan.
inline FixedPointPrediction predict_fixed_point(const ScalarInstance& inst,
                                                double scan_bound = 1e3,
                                                double scan_step = 1e-3) {
    if (!(scan_bound > std::abs(inst.z0)))
        throw std::invalid_argument("predict_fixed_point: scan_bound must exceed |z0|");
    if (!(scan_step > 0.0)) throw std::invalid_argument("predict_fixed_point: scan_step <= 0");

    auto s = [&](double z) { return inst.slope_sum(z); };
    const double s0 = s(inst.z0);

    FixedPointPrediction out;
    if (std::abs(s0) <= 1e-12) {
        out.which = FixedPointCase::A;
        out.zstar = inst.z0;
        out.certificate = s0;
        return out;
    }

    const bool rightward = s0 < 0.0;
    out.which = rightward ? FixedPointCase::B : FixedPointCase::C;
    const double direction = rightward ? 1.0 : -1.0;
    const double limit = inst.z0 + direction * scan_bound;

    double prev = inst.z0;
    double sprev = s0;
    for (long k = 1;; ++k) {
        double z = inst.z0 + direction * scan_step * static_cast<double>(k);
        bool past_end = rightward ? z > limit : z < limit;
        if (past_end) break;
        double sz = s(z);
        if (std::abs(sz) <= 1e-12) {
            out.zstar = z;
            out.certificate = sz;
            return out;
        }
        if ((sz < 0.0) != (sprev < 0.0)) {
            double root = rightward ? detail::refine_zero(s, prev, z)
                                    : detail::refine_zero(s, z, prev);
            out.zstar = root;
            out.certificate = s(root);
            return out;
        }
        prev = z;
        sprev = sz;
    }

    out.zstar = direction * std::numeric_limits<double>::infinity();
    return out;
}

/// Outcome of cross-validating a prediction against an actual run with exact
/// scalar subsolves started from (z0, y0 = g'(z0)).
struct AgreementReport {
    bool agrees = false;
    FixedPointPrediction prediction;
    Verdict verdict = Verdict::MaxIters;
    double z_final = 0.0;
    double y_final = 0.0;
    std::string detail;
    IterationTrace trace;
};

inline AgreementReport verify_prediction(const ScalarInstance& inst,
                                         const FixedPointPrediction& pred,
                                         const StopRule& stop = StopRule{500, 1e-9, 1e-9, 1e6}) {
    StructuredProblem p = inst.problem();
    SolverPolicy policy;
    policy.strategy = SolveStrategy::ScalarExact;

    AgreementReport report;
    report.prediction = pred;
    report.trace = run_admm(p, inst.rho, Vector::Constant(1, inst.z0),
                            Vector::Constant(1, inst.y0()), policy, stop);
    report.verdict = report.trace.verdict;
    report.z_final = report.trace.final_record().z[0];
    report.y_final = report.trace.final_record().y[0];

    if (pred.finite()) {
        double gz = inst.g.derivative(pred.zstar);
        bool z_ok = std::abs(report.z_final - pred.zstar) <= 1e-5;
        bool y_ok = std::abs(report.y_final - gz) <= 1e-5;
        report.agrees = report.verdict != Verdict::Diverged && z_ok && y_ok;
        report.detail = "finite prediction: |z - z*| = " +
                        std::to_string(std::abs(report.z_final - pred.zstar)) +
                        ", |y - g'(z*)| = " + std::to_string(std::abs(report.y_final - gz));
    } else {
        bool sign_ok = (pred.zstar > 0.0) == (report.z_final > 0.0);
        report.agrees = report.verdict == Verdict::Diverged && sign_ok;
        report.detail = std::string("infinite prediction: run verdict ") +
                        to_string(report.verdict) + ", final z " + std::to_string(report.z_final);
    }
    return report;
}

}  // namespace adlm
