#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "adlm/objective.hpp"
#include "adlm/rng.hpp"
#include "adlm/sets.hpp"

namespace adlm {

enum class SolveStrategy { Auto, ClosedForm, ProjectedGradient, GridGlobal, ScalarExact };
enum class SolveStatus { Global, Local, MaxIters };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Global: return "global";
        case SolveStatus::Local: return "local";
        case SolveStatus::MaxIters: return "max-iters";
    }
    return "?";
}

struct SolverPolicy {
    SolveStrategy strategy = SolveStrategy::Auto;
    double tol = 0.0;  // 0 -> per-path default (1e-10 closed/scalar, 1e-8 projected gradient)
    int max_inner_iters = 5000;
    int grid_points_per_dim = 101;
    int multistart_count = 1;
    std::uint64_t seed = 0;
};

/// One block subproblem in canonical form:
///   minimize  objective(v) + linear_shift'v + (1/2) v' penalty_matrix v
///   over      v in set,
/// warm-started at warm_start. The x-update of the outer loops folds to
/// linear_shift = A'y + rho A'(Bz - c) and penalty_matrix = rho A'A.
struct SubproblemSpec {
    ObjectiveBlock objective;
    Vector linear_shift;
    Matrix penalty_matrix;
    ConstraintSet set;
    Vector warm_start;
};

struct BlockSolution {
    Vector minimizer;
    SolveStatus status = SolveStatus::Local;
    bool via_grid = false;  // grid-global annotation
    int inner_iterations = 0;
};

/// Root of fprime(x) + shift + rho (x - anchor) = 0 for rho > L, where L is
/// a Lipschitz constant of fprime. The equation is strongly monotone, so the
/// root is unique and lies within |fprime(anchor) + shift| / (rho - L) of the
/// anchor. Safeguarded secant with bisection fallback, |residual| <= 1e-12.
inline double scalar_strongly_convex_solve(const std::function<double(double)>& fprime,
                                           double shift, double rho, double anchor, double warm,
                                           double lipschitz) {
    if (!(rho > lipschitz))
        throw std::invalid_argument("scalar_strongly_convex_solve: requires rho > L");
    auto F = [&](double x) { return fprime(x) + shift + rho * (x - anchor); };

    double f_anchor = F(anchor);
    if (f_anchor == 0.0) return anchor;

    double radius = std::abs(f_anchor) / (rho - lipschitz);
    double lo, hi;
    if (f_anchor > 0.0) {  // F increasing: root left of the anchor
        hi = anchor;
        lo = anchor - radius * (1.0 + 1e-9) - 1e-300;
    } else {
        lo = anchor;
        hi = anchor + radius * (1.0 + 1e-9) + 1e-300;
    }
    for (int expand = 0; expand < 8 && F(lo) > 0.0; ++expand) lo -= radius;
    for (int expand = 0; expand < 8 && F(hi) < 0.0; ++expand) hi += radius;

    double x = std::clamp(warm, lo, hi);
    double fx = F(x);
    double x_prev = anchor, f_prev = f_anchor;
    double scale = std::max(1.0, std::abs(f_anchor));
    for (int it = 0; it < 200; ++it) {
        if (std::abs(fx) <= 1e-14 * scale) break;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        double x_new;
        double df = fx - f_prev;
        if (df != 0.0 && x != x_prev) {
            x_new = x - fx * (x - x_prev) / df;  // secant
            if (!(x_new > lo && x_new < hi)) x_new = 0.5 * (lo + hi);
        } else {
            x_new = 0.5 * (lo + hi);
        }
        x_prev = x;
        f_prev = fx;
        x = x_new;
        fx = F(x);
        if (hi - lo <= 1e-16 * (1.0 + std::abs(x))) break;
    }
    return x;
}

namespace detail {

struct CanonicalModel {
    const SubproblemSpec* spec;

    double value(const Vector& v) const {
        return spec->objective.value(v) + spec->linear_shift.dot(v) +
               0.5 * v.dot(spec->penalty_matrix * v);
    }
    Vector gradient(const Vector& v) const {
        return spec->objective.gradient(v) + spec->linear_shift + spec->penalty_matrix * v;
    }
    // 1-d shortcuts
    double value1(double v) const {
        Vector t(1);
        t[0] = v;
        return value(t);
    }
    double deriv1(double v) const {
        return spec->objective.derivative(v) + spec->linear_shift[0] + spec->penalty_matrix(0, 0) * v;
    }
    double deriv2_1(double v) const {
        return spec->objective.second_derivative(v) + spec->penalty_matrix(0, 0);
    }
};

inline bool lex_less(const Vector& a, const Vector& b) {
    for (Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

// Deterministic candidate accumulator: lowest value wins, exact ties go to
// the lexicographically smallest point.
struct BestPoint {
    Vector point;
    double value = std::numeric_limits<double>::infinity();
    bool valid = false;

    void offer(const Vector& v, double val) {
        if (!std::isfinite(val)) return;
        if (!valid || val < value || (val == value && lex_less(v, point))) {
            point = v;
            value = val;
            valid = true;
        }
    }
};

// Polishes a bracketed root of the 1-d derivative with Newton steps
// safeguarded by bisection; d(lo) and d(hi) have opposite signs.
inline double polish_derivative_root(const CanonicalModel& m, double lo, double hi) {
    double dlo = m.deriv1(lo);
    double dhi = m.deriv1(hi);
    if (dlo == 0.0) return lo;
    if (dhi == 0.0) return hi;
    if (dlo > 0.0) {
        std::swap(lo, hi);
        std::swap(dlo, dhi);
    }
    // now d(lo) < 0 < d(hi); lo/hi may be unordered as coordinates
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double d = m.deriv1(x);
        if (std::abs(d) <= 1e-14) return x;
        if (d < 0.0)
            lo = x;
        else
            hi = x;
        double d2 = m.deriv2_1(x);
        double x_new = d2 != 0.0 ? x - d / d2 : 0.5 * (lo + hi);
        double a = std::min(lo, hi), b = std::max(lo, hi);
        if (!(x_new > a && x_new < b)) x_new = 0.5 * (lo + hi);
        if (std::abs(x_new - x) <= 1e-17 * (1.0 + std::abs(x))) return x_new;
        x = x_new;
    }
    return x;
}

struct Piece {
    double lo;  // may be -inf
    double hi;  // may be +inf
};

inline std::vector<Piece> set_pieces_1d(const ConstraintSet& set) {
    switch (set.form()) {
        case SetForm::WholeSpace:
            return {Piece{-std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()}};
        case SetForm::Box: {
            auto bb = set.bounding_box();
            if (bb) return {Piece{bb->first[0], bb->second[0]}};
            // a box may be half-infinite
            Vector probe_lo = set.project(Vector::Constant(1, -1e300));
            Vector probe_hi = set.project(Vector::Constant(1, 1e300));
            double lo = probe_lo[0] <= -1e299 ? -std::numeric_limits<double>::infinity() : probe_lo[0];
            double hi = probe_hi[0] >= 1e299 ? std::numeric_limits<double>::infinity() : probe_hi[0];
            return {Piece{lo, hi}};
        }
        case SetForm::Ball: {
            auto bb = set.bounding_box();
            return {Piece{bb->first[0], bb->second[0]}};
        }
        case SetForm::IntervalUnion1d: {
            std::vector<Piece> out;
            for (const auto& iv : set.intervals()) out.push_back(Piece{iv.lo, iv.hi});
            return out;
        }
        default:
            throw std::invalid_argument("scalar-exact: unsupported set form");
    }
}

// Stationary candidates of the model derivative on a finite interval, found
// by a dense sign-change scan followed by safeguarded polish.
inline void scan_stationary(const CanonicalModel& m, double a, double b, int n_points,
                            BestPoint& best) {
    n_points = std::max(n_points, 3);
    double prev_x = a;
    double prev_d = m.deriv1(a);
    for (int k = 1; k < n_points; ++k) {
        double x = a + (b - a) * static_cast<double>(k) / static_cast<double>(n_points - 1);
        double d = m.deriv1(x);
        double root = std::numeric_limits<double>::quiet_NaN();
        if (std::abs(prev_d) <= 1e-12) {
            root = prev_x;  // grid hit counts as a zero
        } else if (prev_d * d < 0.0) {
            root = polish_derivative_root(m, prev_x, x);
        }
        if (std::isfinite(root)) {
            Vector v(1);
            v[0] = root;
            best.offer(v, m.value1(root));
        }
        prev_x = x;
        prev_d = d;
    }
    if (std::abs(m.deriv1(b)) <= 1e-12) {
        Vector v(1);
        v[0] = b;
        best.offer(v, m.value1(b));
    }
}

struct Scalar1dResult {
    double x;
    bool certified_global;
};

// Exact 1-d minimization over a union of interval pieces. Strong convexity
// (penalty curvature exceeding the objective's Lipschitz constant, or a
// convex objective with positive curvature) gives a single-root solve;
// otherwise a dense scan brackets every stationary point.
inline Scalar1dResult solve_scalar_pieces(const CanonicalModel& m, const std::vector<Piece>& pieces,
                                          double warm, int scan_points) {
    const double p = m.spec->penalty_matrix(0, 0);
    auto lip = m.spec->objective.gradient_lipschitz();
    const bool strongly_convex =
        (lip && p > *lip) || (m.spec->objective.is_convex() == Tri::Yes && p > 0.0);
    auto deriv_bound = m.spec->objective.gradient_bound();

    BestPoint best;
    bool certified = true;

    for (const auto& piece : pieces) {
        const bool lo_finite = std::isfinite(piece.lo);
        const bool hi_finite = std::isfinite(piece.hi);

        if (lo_finite) {
            Vector v(1);
            v[0] = piece.lo;
            best.offer(v, m.value1(piece.lo));
        }
        if (hi_finite) {
            Vector v(1);
            v[0] = piece.hi;
            best.offer(v, m.value1(piece.hi));
        }

        if (strongly_convex) {
            // single interior root of the increasing derivative, if any
            double root;
            if (lip && p > *lip) {
                auto fp = [&](double x) { return m.spec->objective.derivative(x); };
                root = scalar_strongly_convex_solve(fp, m.spec->linear_shift[0], p, 0.0, warm, *lip);
            } else {
                // convex objective: expand a bracket around the warm start
                double start = warm;
                if (lo_finite && start < piece.lo) start = piece.lo;
                if (hi_finite && start > piece.hi) start = piece.hi;
                double lo = start;
                double hi = lo;
                double step = 1.0 + std::abs(lo);
                int guard = 0;
                while (m.deriv1(lo) > 0.0 && guard++ < 80) lo -= step, step *= 2.0;
                step = 1.0 + std::abs(hi);
                guard = 0;
                while (m.deriv1(hi) < 0.0 && guard++ < 80) hi += step, step *= 2.0;
                root = polish_derivative_root(m, lo, hi);
            }
            double clamped = std::clamp(root, piece.lo, piece.hi);
            Vector v(1);
            v[0] = clamped;
            best.offer(v, m.value1(clamped));
            continue;
        }

        double a = piece.lo, b = piece.hi;
        if (!lo_finite || !hi_finite) {
            if (deriv_bound && p > 0.0) {
                // every root of deriv lies within (|obj'| + |w|)/p of zero curvature center
                double center = -m.spec->linear_shift[0] / p;
                double radius = (*deriv_bound + std::abs(m.spec->linear_shift[0])) / p + 1.0;
                a = std::max(lo_finite ? piece.lo : center - radius, center - radius);
                b = std::min(hi_finite ? piece.hi : center + radius, center + radius);
            } else {
                // best-effort window; cannot certify a global minimum
                double radius = 8.0 * (1.0 + std::abs(warm) + std::abs(m.spec->linear_shift[0]));
                a = lo_finite ? piece.lo : warm - radius;
                b = hi_finite ? piece.hi : warm + radius;
                certified = false;
            }
        }
        if (a < b) scan_stationary(m, a, b, scan_points, best);
    }

    if (!best.valid) {  // degenerate: fall back to the warm start
        return Scalar1dResult{warm, false};
    }
    return Scalar1dResult{best.point[0], certified};
}

inline double operator_norm_upper(const Matrix& P) {
    if (P.size() == 0) return 0.0;
    return P.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm bounds the spectral norm
}

}  // namespace detail

namespace detail {

inline BlockSolution solve_closed_form(const SubproblemSpec& spec) {
    Matrix H;
    Vector rhs;
    if (spec.objective.kind() == BlockKind::Quadratic) {
        const auto& q = std::get<QuadraticData>(spec.objective.data());
        H = 2.0 * q.Q + spec.penalty_matrix;
        rhs = -(q.q + spec.linear_shift);
    } else if (spec.objective.kind() == BlockKind::Zero) {
        H = spec.penalty_matrix;
        rhs = -spec.linear_shift;
    } else {
        throw std::invalid_argument("closed-form path requires a zero or quadratic objective");
    }

    BlockSolution out;
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() == Eigen::Success) {
        // info() alone misses borderline-singular forms at some scales; the
        // Cholesky pivot ratio certifies definiteness
        Vector pivots = llt.matrixLLT().diagonal();
        double pmin = pivots.minCoeff(), pmax = pivots.maxCoeff();
        if (pmin > 0.0 && pmin >= 1e-7 * pmax) {
            out.minimizer = llt.solve(rhs);
            out.status = SolveStatus::Global;  // positive definite quadratic form
            return out;
        }
    }
    // singular or indefinite form: a deterministic rank-revealing solve
    // picks one stationary point
    out.minimizer = H.colPivHouseholderQr().solve(rhs);
    out.status = SolveStatus::Local;
    return out;
}

inline BlockSolution solve_projected_gradient(const SubproblemSpec& spec, const SolverPolicy& policy,
                                              const CanonicalModel& model) {
    const double tol = policy.tol > 0.0 ? policy.tol : 1e-8;
    const Index n = spec.objective.dimension();

    // curvature estimate from fixed-pattern probes around the warm start
    auto estimate_local_lipschitz = [&](const Vector& at) {
        Vector g0 = spec.objective.gradient(at);
        double h = 1e-4 * (1.0 + at.norm());
        double est = 0.0;
        QuasiRandomSequence seq(static_cast<int>(n));
        std::vector<double> buf(static_cast<std::size_t>(n));
        for (int probe = 0; probe < 3; ++probe) {
            Vector d(n);
            seq.next(buf.data());
            for (Index i = 0; i < n; ++i) d[i] = 2.0 * buf[static_cast<std::size_t>(i)] - 1.0;
            double dn = d.norm();
            if (dn == 0.0) continue;
            d /= dn;
            Vector g1 = spec.objective.gradient(at + h * d);
            est = std::max(est, (g1 - g0).norm() / h);
        }
        return est;
    };

    auto run_from = [&](Vector v, int& iters_used) {
        v = spec.set.project(v);
        double lips = estimate_local_lipschitz(v) + operator_norm_upper(spec.penalty_matrix);
        double step0 = 1.0 / (lips + 1e-12);
        double step = step0;
        double fv = model.value(v);
        SolveStatus status = SolveStatus::MaxIters;
        int it = 0;
        for (; it < policy.max_inner_iters; ++it) {
            Vector g = model.gradient(v);
            step = std::min(step * 2.0, step0);
            Vector trial;
            double ft = 0.0;
            bool accepted = false;
            for (int bt = 0; bt < 60; ++bt) {
                trial = spec.set.project(v - step * g);
                ft = model.value(trial);
                double move2 = (trial - v).squaredNorm();
                if (ft <= fv - (1e-4 / step) * move2) {  // Armijo sufficient decrease
                    accepted = true;
                    break;
                }
                if (std::sqrt(move2) <= tol) break;
                step *= 0.5;
            }
            if (!accepted) {
                status = SolveStatus::Local;
                break;
            }
            double move = (trial - v).norm();
            v = trial;
            fv = ft;
            if (move <= tol) {
                status = SolveStatus::Local;
                ++it;
                break;
            }
        }
        iters_used += it;
        return std::make_pair(v, status);
    };

    BlockSolution out;
    int iters = 0;
    auto [best_v, best_status] = run_from(spec.warm_start, iters);
    double best_val = model.value(best_v);

    // optional multistart from deterministic seeded points in the set
    for (int ms = 1; ms < policy.multistart_count; ++ms) {
        RandomStream rng(policy.seed, static_cast<std::uint64_t>(ms));
        Vector start(n);
        auto bb = spec.set.bounding_box();
        for (Index i = 0; i < n; ++i) {
            if (bb)
                start[i] = rng.uniform(bb->first[i], bb->second[i]);
            else
                start[i] = spec.warm_start[i] + rng.gaussian();
        }
        auto [v, status] = run_from(start, iters);
        double val = model.value(v);
        if (val < best_val) {
            best_v = v;
            best_val = val;
            best_status = status;
        }
    }

    out.minimizer = best_v;
    out.status = best_status;
    out.inner_iterations = iters;
    return out;
}

inline BlockSolution solve_scalar_exact(const SubproblemSpec& spec, const SolverPolicy& policy,
                                        const CanonicalModel& model) {
    if (spec.objective.dimension() != 1)
        throw std::invalid_argument("scalar-exact path requires dimension 1");
    auto pieces = set_pieces_1d(spec.set);
    int scan = std::max(policy.grid_points_per_dim, 1001);
    auto res = solve_scalar_pieces(model, pieces, spec.warm_start[0], scan);
    BlockSolution out;
    out.minimizer = Vector::Constant(1, res.x);
    out.status = res.certified_global ? SolveStatus::Global : SolveStatus::Local;
    return out;
}

// Separable route: a sum of 1-d parts with disjoint index maps, a diagonal
// penalty, and a per-coordinate set solves each coordinate exactly.
inline std::optional<BlockSolution> try_solve_separable(const SubproblemSpec& spec,
                                                        const SolverPolicy& policy) {
    if (spec.objective.kind() != BlockKind::Sum) return std::nullopt;
    const Index n = spec.objective.dimension();
    if (spec.set.form() != SetForm::WholeSpace && spec.set.form() != SetForm::Box)
        return std::nullopt;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j && spec.penalty_matrix(i, j) != 0.0) return std::nullopt;

    const auto& sum = std::get<SumData>(spec.objective.data());
    std::vector<const ObjectiveBlock*> part_of(static_cast<std::size_t>(n), nullptr);
    for (std::size_t k = 0; k < sum.parts.size(); ++k) {
        if (sum.parts[k].dimension() != 1) return std::nullopt;
        Index idx = sum.maps[k][0];
        if (part_of[static_cast<std::size_t>(idx)] != nullptr) return std::nullopt;  // overlap
        part_of[static_cast<std::size_t>(idx)] = &sum.parts[k];
    }

    auto bb = spec.set.form() == SetForm::Box
                  ? std::optional<std::pair<Vector, Vector>>(
                        std::in_place, std::get<BoxData>(spec.set.data()).lower,
                        std::get<BoxData>(spec.set.data()).upper)
                  : std::nullopt;

    BlockSolution out;
    out.minimizer = Vector::Zero(n);
    out.status = SolveStatus::Global;
    int scan = std::max(policy.grid_points_per_dim, 1001);
    for (Index i = 0; i < n; ++i) {
        ObjectiveBlock part =
            part_of[static_cast<std::size_t>(i)] ? *part_of[static_cast<std::size_t>(i)]
                                                 : ObjectiveBlock::zero(1);
        SubproblemSpec sub{part, Vector::Constant(1, spec.linear_shift[i]),
                           Matrix::Constant(1, 1, spec.penalty_matrix(i, i)),
                           bb ? ConstraintSet::box1d(bb->first[i], bb->second[i])
                              : ConstraintSet::whole_space(1),
                           Vector::Constant(1, spec.warm_start[i])};
        CanonicalModel m{&sub};
        auto res = solve_scalar_pieces(m, set_pieces_1d(sub.set), spec.warm_start[i], scan);
        out.minimizer[i] = res.x;
        if (!res.certified_global) out.status = SolveStatus::Local;
    }
    return out;
}

inline BlockSolution solve_grid(const SubproblemSpec& spec, const SolverPolicy& policy,
                                const CanonicalModel& model) {
    const Index n = spec.objective.dimension();
    if (n > 3)
        throw std::invalid_argument("grid-global is only admitted for set dimension <= 3");
    auto bb = spec.set.bounding_box();
    if (!bb) throw std::invalid_argument("grid-global requires a bounded set");

    const int npts = std::max(policy.grid_points_per_dim, 2);
    BestPoint best;
    Vector v(n);
    std::array<int, 3> idx{0, 0, 0};
    const int n1 = npts;
    const int n2 = n >= 2 ? npts : 1;
    const int n3 = n >= 3 ? npts : 1;
    for (idx[0] = 0; idx[0] < n1; ++idx[0]) {
        for (idx[1] = 0; idx[1] < n2; ++idx[1]) {
            for (idx[2] = 0; idx[2] < n3; ++idx[2]) {
                for (Index d = 0; d < n; ++d) {
                    double frac = npts == 1 ? 0.0
                                            : static_cast<double>(idx[static_cast<std::size_t>(d)]) /
                                                  static_cast<double>(npts - 1);
                    v[d] = bb->first[d] + frac * (bb->second[d] - bb->first[d]);
                }
                if (!spec.set.contains(v, 1e-12)) continue;
                best.offer(v, model.value(v));
            }
        }
    }

    BlockSolution out;
    if (!best.valid) {
        out.minimizer = spec.set.project(spec.warm_start);
        out.status = SolveStatus::Local;
        out.via_grid = true;
        return out;
    }

    // local polish of the winning grid point
    if (n == 1) {
        // restrict to the piece holding the winner and solve it exactly
        auto pieces = set_pieces_1d(spec.set);
        for (const auto& piece : pieces) {
            if (best.point[0] >= piece.lo - 1e-15 && best.point[0] <= piece.hi + 1e-15) {
                auto res = solve_scalar_pieces(model, {piece}, best.point[0],
                                               std::max(policy.grid_points_per_dim, 1001));
                Vector v1 = Vector::Constant(1, res.x);
                best.offer(v1, model.value(v1));
                break;
            }
        }
    } else {
        SubproblemSpec polish = spec;
        polish.warm_start = best.point;
        auto pg = solve_projected_gradient(polish, policy, model);
        best.offer(pg.minimizer, model.value(pg.minimizer));
    }

    out.minimizer = best.point;
    out.status = SolveStatus::Global;  // certified only up to the grid resolution
    out.via_grid = true;
    return out;
}

}  // namespace detail

/// Solves one block subproblem per the policy. `auto` routes: closed form for
/// zero/quadratic objectives on the whole space, exact per-coordinate solves
/// for separable objectives with diagonal penalties, scalar-exact in one
/// dimension, grid search with polish on bounded sets up to dimension 3, and
/// projected gradient otherwise. The returned value never exceeds the value
/// at the warm start.
inline BlockSolution solve_block(const SubproblemSpec& spec, const SolverPolicy& policy = {}) {
    const Index n = spec.objective.dimension();
    if (spec.linear_shift.size() != n || spec.penalty_matrix.rows() != n ||
        spec.penalty_matrix.cols() != n || spec.set.dimension() != n || spec.warm_start.size() != n)
        throw std::invalid_argument("solve_block: inconsistent subproblem dimensions");
    if ((spec.penalty_matrix - spec.penalty_matrix.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * (1.0 + spec.penalty_matrix.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("solve_block: penalty matrix must be symmetric");

    detail::CanonicalModel model{&spec};
    const bool whole = spec.set.form() == SetForm::WholeSpace;

    BlockSolution out;
    switch (policy.strategy) {
        case SolveStrategy::ClosedForm:
            if (!whole)
                throw std::invalid_argument("closed-form path requires the whole-space set");
            out = detail::solve_closed_form(spec);
            break;
        case SolveStrategy::ScalarExact:
            out = detail::solve_scalar_exact(spec, policy, model);
            break;
        case SolveStrategy::GridGlobal:
            out = detail::solve_grid(spec, policy, model);
            break;
        case SolveStrategy::ProjectedGradient:
            if (!spec.set.projectable())
                throw std::invalid_argument("projected gradient requires a projectable set");
            out = detail::solve_projected_gradient(spec, policy, model);
            break;
        case SolveStrategy::Auto: {
            if (whole && (spec.objective.kind() == BlockKind::Zero ||
                          spec.objective.kind() == BlockKind::Quadratic)) {
                out = detail::solve_closed_form(spec);
            } else if (auto sep = detail::try_solve_separable(spec, policy)) {
                out = *sep;
            } else if (n == 1 && spec.set.form() != SetForm::Functional &&
                       spec.set.form() != SetForm::Product) {
                out = detail::solve_scalar_exact(spec, policy, model);
            } else if (n <= 3 && spec.set.bounded() && spec.set.projectable()) {
                out = detail::solve_grid(spec, policy, model);
            } else if (spec.set.projectable()) {
                out = detail::solve_projected_gradient(spec, policy, model);
            } else {
                throw std::invalid_argument(
                    "solve_block: functional sets admit no solve path (see project())");
            }
            break;
        }
    }

    // monotone-improvement guard against the (projected) warm start; the
    // margin keeps round-off ties from overriding an exact solve
    if (spec.set.projectable()) {
        Vector warm = spec.set.project(spec.warm_start);
        double warm_value = model.value(warm);
        if (warm_value < model.value(out.minimizer) - 1e-12 * (1.0 + std::abs(warm_value))) {
            out.minimizer = warm;
            out.status = SolveStatus::Local;
        }
    }
    return out;
}

/// Euclidean projection onto a special-form set (module-level alias of
/// ConstraintSet::project, the operation named by the solvers).
inline Vector project(const ConstraintSet& set, const Vector& v) { return set.project(v); }

}  // namespace adlm
