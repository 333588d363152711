#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "adlm/problem.hpp"

namespace adlm {

/// Evaluated first-order necessary conditions at a primal-dual point, with
/// multipliers recovered by least squares over the active constraints.
/// Inequality multipliers are clamped to >= 0; the clamp magnitude is
/// reported as dual_feasibility_violation so each field stays independently
/// interpretable.
struct FonCertificate {
    double primal_residual = 0.0;                  // ||Ax + Bz - c||
    double set_violation = 0.0;                    // max constraint violation over X, Z
    double dual_feasibility_violation = 0.0;       // clamp magnitude of gamma/omega
    double complementary_slackness_violation = 0.0;
    double stationarity_residual_x = 0.0;
    double stationarity_residual_z = 0.0;
    Vector lambda;  // X equalities
    Vector gamma;   // X inequalities (>= 0)
    Vector mu;      // Z equalities
    Vector omega;   // Z inequalities (>= 0)
    bool regularity_ok = true;  // false when active gradients are rank deficient
    double tolerance = 0.0;
    bool passed = false;

    double worst_residual() const {
        return std::max({primal_residual, set_violation, dual_feasibility_violation,
                         complementary_slackness_violation, stationarity_residual_x,
                         stationarity_residual_z});
    }
};

namespace detail {

struct BlockFonResult {
    double stationarity = 0.0;
    double clamp_magnitude = 0.0;
    double slackness = 0.0;
    Vector eq_multipliers;
    Vector ineq_multipliers;
    bool regular = true;
};

// Least-squares multiplier recovery for one variable block:
// minimize || base + D m || over multipliers m of the active constraints,
// where base = grad objective + (coupling matrix)' y.
inline BlockFonResult recover_block_multipliers(const FunctionalForm& form, const Vector& v,
                                                const Vector& base, double tol) {
    BlockFonResult out;
    const Index n = v.size();
    const std::size_t n_eq = form.equalities.size();
    const std::size_t n_ineq = form.inequalities.size();

    std::vector<double> ineq_values(n_ineq);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n_ineq; ++i) {
        ineq_values[i] = form.inequalities[i].value(v);
        if (ineq_values[i] >= -tol) active.push_back(i);  // active-set threshold: value >= -tol
    }

    const Index cols = static_cast<Index>(n_eq + active.size());
    out.eq_multipliers = Vector::Zero(static_cast<Index>(n_eq));
    out.ineq_multipliers = Vector::Zero(static_cast<Index>(n_ineq));

    Vector residual = base;
    if (cols > 0) {
        Matrix D(n, cols);
        for (std::size_t i = 0; i < n_eq; ++i) D.col(static_cast<Index>(i)) = form.equalities[i].gradient(v);
        for (std::size_t k = 0; k < active.size(); ++k)
            D.col(static_cast<Index>(n_eq + k)) = form.inequalities[active[k]].gradient(v);

        Eigen::JacobiSVD<Matrix> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
        double smin = svd.singularValues().size() > 0
                          ? svd.singularValues()[svd.singularValues().size() - 1]
                          : 0.0;
        if (cols > n || smax == 0.0 || smin < 1e-10 * smax) out.regular = false;

        Vector m = svd.solve(-base);
        for (std::size_t i = 0; i < n_eq; ++i) out.eq_multipliers[static_cast<Index>(i)] = m[static_cast<Index>(i)];
        for (std::size_t k = 0; k < active.size(); ++k) {
            double val = m[static_cast<Index>(n_eq + k)];
            if (val < 0.0) {
                out.clamp_magnitude = std::max(out.clamp_magnitude, -val);
                val = 0.0;
            }
            out.ineq_multipliers[static_cast<Index>(active[k])] = val;
        }

        residual = base;
        for (std::size_t i = 0; i < n_eq; ++i)
            residual += out.eq_multipliers[static_cast<Index>(i)] * form.equalities[i].gradient(v);
        for (std::size_t k = 0; k < active.size(); ++k)
            residual += out.ineq_multipliers[static_cast<Index>(active[k])] *
                        form.inequalities[active[k]].gradient(v);
    }
    out.stationarity = residual.norm();

    for (std::size_t i = 0; i < n_ineq; ++i)
        out.slackness = std::max(out.slackness,
                                 std::abs(out.ineq_multipliers[static_cast<Index>(i)] * ineq_values[i]));
    return out;
}

}  // namespace detail

/// Evaluates the four first-order conditions at `pt`:
///   1) primal feasibility (coupling residual and set membership),
///   2) dual feasibility of the recovered inequality multipliers,
///   3) complementary slackness,
///   4) vanishing Lagrangian gradient in each block.
/// Multipliers are recovered per block by stacking active constraint
/// gradients and solving a least-squares stationarity fit. Rank-deficient
/// active gradients mark the certificate regularity-violated; residuals are
/// still reported.
inline FonCertificate check_fon(const StructuredProblem& p, const PrimalDualPoint& pt, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("check_fon: tolerance must be positive");
    check_point(p, pt.x, pt.z);
    if (pt.y.size() != p.coupling_dim())
        throw std::invalid_argument("check_fon: multiplier dimension mismatch");

    FonCertificate cert;
    cert.tolerance = tol;
    cert.primal_residual = eval_primal_residual(p, pt.x, pt.z);
    cert.set_violation = std::max(p.X.violation(pt.x), p.Z.violation(pt.z));

    FunctionalForm fx = p.X.to_functional();
    FunctionalForm fz = p.Z.to_functional();
    Vector base_x = p.f.gradient(pt.x) + p.A.transpose() * pt.y;
    Vector base_z = p.g.gradient(pt.z) + p.B.transpose() * pt.y;

    auto rx = detail::recover_block_multipliers(fx, pt.x, base_x, tol);
    auto rz = detail::recover_block_multipliers(fz, pt.z, base_z, tol);

    cert.lambda = rx.eq_multipliers;
    cert.gamma = rx.ineq_multipliers;
    cert.mu = rz.eq_multipliers;
    cert.omega = rz.ineq_multipliers;
    cert.stationarity_residual_x = rx.stationarity;
    cert.stationarity_residual_z = rz.stationarity;
    cert.dual_feasibility_violation = std::max(rx.clamp_magnitude, rz.clamp_magnitude);
    cert.complementary_slackness_violation = std::max(rx.slackness, rz.slackness);
    cert.regularity_ok = rx.regular && rz.regular;

    bool primal_ok = cert.primal_residual <= tol && cert.set_violation <= tol;
    bool dual_ok = cert.dual_feasibility_violation <= tol;
    bool slack_ok = cert.complementary_slackness_violation <= tol;
    bool stationary_ok =
        cert.stationarity_residual_x <= tol && cert.stationarity_residual_z <= tol;
    cert.passed = primal_ok && dual_ok && slack_ok && stationary_ok;
    return cert;
}

}  // namespace adlm
