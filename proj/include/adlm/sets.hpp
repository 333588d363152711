#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "adlm/types.hpp"

namespace adlm {

enum class SetForm { WholeSpace, Box, Ball, IntervalUnion1d, Functional, Product };

inline const char* to_string(SetForm f) {
    switch (f) {
        case SetForm::WholeSpace: return "whole-space";
        case SetForm::Box: return "box";
        case SetForm::Ball: return "ball";
        case SetForm::IntervalUnion1d: return "interval-union-1d";
        case SetForm::Functional: return "functional";
        case SetForm::Product: return "product";
    }
    return "?";
}

struct Interval {
    double lo;
    double hi;
};

/// A smooth scalar constraint with value and gradient evaluators.
struct SmoothConstraint {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::string label;
};

/// Functional description of a set: { x | eq_i(x) = 0, ineq_j(x) <= 0 }.
struct FunctionalForm {
    Index dim = 0;
    std::vector<SmoothConstraint> equalities;
    std::vector<SmoothConstraint> inequalities;
};

class ConstraintSet;

namespace detail {

struct WholeSpaceData {
    Index dim;
};

struct BoxData {
    Vector lower, upper;  // entries may be +-inf
};

struct BallData {
    Vector center;
    double radius;
};

struct IntervalUnionData {
    std::vector<Interval> intervals;  // sorted, disjoint, closed
};

struct FunctionalData {
    Index dim;
    std::shared_ptr<const FunctionalForm> form;  // shared: evaluators are immutable
};

struct ProductData {
    std::vector<ConstraintSet> parts;
    std::vector<Index> offsets;
    Index dim;
};

using SetData = std::variant<WholeSpaceData, BoxData, BallData, IntervalUnionData,
                             FunctionalData, ProductData>;

}  // namespace detail

/// A feasible set in one of the recognized special forms or as explicit
/// smooth equality/inequality constraints. Special forms support exact
/// Euclidean projection; every form converts to a functional description
/// for first-order certificates.
class ConstraintSet {
public:
    static ConstraintSet whole_space(Index dim) {
        if (dim <= 0) throw std::invalid_argument("constraint set: dimension must be positive");
        return ConstraintSet(dim, detail::WholeSpaceData{dim});
    }

    static ConstraintSet box(Vector lower, Vector upper) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("box set: bound dimensions differ");
        for (Index i = 0; i < lower.size(); ++i)
            if (!(lower[i] <= upper[i]))
                throw std::invalid_argument("box set: requires lower <= upper componentwise");
        Index dim = lower.size();
        return ConstraintSet(dim, detail::BoxData{std::move(lower), std::move(upper)});
    }

    static ConstraintSet box1d(double lo, double hi) {
        Vector l(1), u(1);
        l[0] = lo;
        u[0] = hi;
        return box(std::move(l), std::move(u));
    }

    static ConstraintSet ball(Vector center, double radius) {
        if (radius < 0.0) throw std::invalid_argument("ball set: radius must be nonnegative");
        Index dim = center.size();
        return ConstraintSet(dim, detail::BallData{std::move(center), radius});
    }

    /// Closed disjoint intervals; sorted on construction, overlap rejected.
    static ConstraintSet interval_union(std::vector<Interval> intervals) {
        if (intervals.empty())
            throw std::invalid_argument("interval union: at least one interval required");
        std::sort(intervals.begin(), intervals.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        for (std::size_t k = 0; k < intervals.size(); ++k) {
            if (!(intervals[k].lo <= intervals[k].hi))
                throw std::invalid_argument("interval union: empty interval");
            if (k > 0 && intervals[k].lo <= intervals[k - 1].hi)
                throw std::invalid_argument("interval union: intervals must be disjoint");
        }
        return ConstraintSet(1, detail::IntervalUnionData{std::move(intervals)});
    }

    static ConstraintSet functional(Index dim, std::vector<SmoothConstraint> equalities,
                                    std::vector<SmoothConstraint> inequalities) {
        auto form = std::make_shared<FunctionalForm>();
        form->dim = dim;
        form->equalities = std::move(equalities);
        form->inequalities = std::move(inequalities);
        return ConstraintSet(dim, detail::FunctionalData{dim, std::move(form)});
    }

    /// Cartesian product; projection factorizes over the parts.
    static ConstraintSet product(std::vector<ConstraintSet> parts) {
        if (parts.empty()) throw std::invalid_argument("product set: no parts");
        std::vector<Index> offsets;
        Index dim = 0;
        for (const auto& p : parts) {
            offsets.push_back(dim);
            dim += p.dimension();
        }
        return ConstraintSet(dim, detail::ProductData{std::move(parts), std::move(offsets), dim});
    }

    Index dimension() const { return dim_; }

    SetForm form() const { return static_cast<SetForm>(data_.index()); }

    /// Special forms (and their products) admit exact projection.
    bool projectable() const {
        if (form() == SetForm::Functional) return false;
        if (form() == SetForm::Product) {
            for (const auto& p : std::get<detail::ProductData>(data_).parts)
                if (!p.projectable()) return false;
        }
        return true;
    }

    /// Euclidean projection. Interval unions project to the nearest interval;
    /// exact ties go to the interval with the smaller left endpoint.
    Vector project(const Vector& v) const {
        check_dim(v);
        return std::visit(
            [&](const auto& d) -> Vector {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::WholeSpaceData>) {
                    return v;
                } else if constexpr (std::is_same_v<T, detail::BoxData>) {
                    return v.cwiseMax(d.lower).cwiseMin(d.upper);
                } else if constexpr (std::is_same_v<T, detail::BallData>) {
                    Vector delta = v - d.center;
                    double n = delta.norm();
                    if (n <= d.radius) return v;
                    return d.center + (d.radius / n) * delta;
                } else if constexpr (std::is_same_v<T, detail::IntervalUnionData>) {
                    double x = v[0];
                    double best = d.intervals.front().lo;
                    double best_dist = std::numeric_limits<double>::infinity();
                    for (const auto& iv : d.intervals) {  // sorted: ties keep the earlier interval
                        double cand = std::clamp(x, iv.lo, iv.hi);
                        double dist = std::abs(x - cand);
                        if (dist < best_dist) {
                            best_dist = dist;
                            best = cand;
                        }
                    }
                    Vector out(1);
                    out[0] = best;
                    return out;
                } else if constexpr (std::is_same_v<T, detail::ProductData>) {
                    Vector out(dim_);
                    for (std::size_t k = 0; k < d.parts.size(); ++k) {
                        Index off = d.offsets[k];
                        Index n = d.parts[k].dimension();
                        out.segment(off, n) = d.parts[k].project(v.segment(off, n));
                    }
                    return out;
                } else {
                    throw std::invalid_argument(
                        "project: functional sets are unsupported; use a special form");
                }
            },
            data_);
    }

    /// Geometric distance to the set (0 inside). Infinity for functional
    /// forms, which have no cheap distance.
    double distance(const Vector& v) const {
        check_dim(v);
        if (form() == SetForm::Functional)
            return contains(v, 1e-12) ? 0.0 : std::numeric_limits<double>::infinity();
        return (v - project(v)).norm();
    }

    bool contains(const Vector& v, double tol = 1e-12) const {
        check_dim(v);
        if (form() == SetForm::Functional) {
            const auto& form_ptr = std::get<detail::FunctionalData>(data_).form;
            for (const auto& c : form_ptr->equalities)
                if (std::abs(c.value(v)) > tol) return false;
            for (const auto& c : form_ptr->inequalities)
                if (c.value(v) > tol) return false;
            return true;
        }
        return distance(v) <= tol;
    }

    /// Max constraint violation in the functional description (the quantity
    /// paired with recovered multipliers in certificates).
    double violation(const Vector& v) const {
        check_dim(v);
        FunctionalForm f = to_functional();
        double worst = 0.0;
        for (const auto& c : f.equalities) worst = std::max(worst, std::abs(c.value(v)));
        for (const auto& c : f.inequalities) worst = std::max(worst, c.value(v));
        return std::max(worst, 0.0);
    }

    /// Componentwise bounding box when the set is bounded in every direction.
    std::optional<std::pair<Vector, Vector>> bounding_box() const {
        return std::visit(
            [&](const auto& d) -> std::optional<std::pair<Vector, Vector>> {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::BoxData>) {
                    if (!d.lower.allFinite() || !d.upper.allFinite()) return std::nullopt;
                    return std::make_pair(d.lower, d.upper);
                } else if constexpr (std::is_same_v<T, detail::BallData>) {
                    Vector r = Vector::Constant(dim_, d.radius);
                    return std::make_pair(Vector(d.center - r), Vector(d.center + r));
                } else if constexpr (std::is_same_v<T, detail::IntervalUnionData>) {
                    Vector lo(1), hi(1);
                    lo[0] = d.intervals.front().lo;
                    hi[0] = d.intervals.back().hi;
                    if (!std::isfinite(lo[0]) || !std::isfinite(hi[0])) return std::nullopt;
                    return std::make_pair(lo, hi);
                } else if constexpr (std::is_same_v<T, detail::ProductData>) {
                    Vector lo(dim_), hi(dim_);
                    for (std::size_t k = 0; k < d.parts.size(); ++k) {
                        auto bb = d.parts[k].bounding_box();
                        if (!bb) return std::nullopt;
                        lo.segment(d.offsets[k], d.parts[k].dimension()) = bb->first;
                        hi.segment(d.offsets[k], d.parts[k].dimension()) = bb->second;
                    }
                    return std::make_pair(lo, hi);
                } else {
                    return std::nullopt;
                }
            },
            data_);
    }

    bool bounded() const { return bounding_box().has_value(); }

    Tri convex() const {
        switch (form()) {
            case SetForm::WholeSpace:
            case SetForm::Box:
            case SetForm::Ball:
                return Tri::Yes;
            case SetForm::IntervalUnion1d:
                return std::get<detail::IntervalUnionData>(data_).intervals.size() == 1 ? Tri::Yes
                                                                                        : Tri::No;
            case SetForm::Product: {
                for (const auto& p : std::get<detail::ProductData>(data_).parts) {
                    Tri c = p.convex();
                    if (c != Tri::Yes) return c;
                }
                return Tri::Yes;
            }
            default:
                return Tri::Unknown;
        }
    }

    /// Compactness of the stored form; whole spaces and unbounded boxes are
    /// not compact, functional forms are undecidable here.
    Tri compact() const {
        switch (form()) {
            case SetForm::WholeSpace:
                return Tri::No;
            case SetForm::Functional:
                return Tri::Unknown;
            default:
                return bounded() ? Tri::Yes : Tri::No;
        }
    }

    /// Existence of a point with all inequality constraints strictly
    /// inactive (Slater-style qualification for the stored description).
    Tri strictly_feasible_point_exists() const {
        switch (form()) {
            case SetForm::WholeSpace:
                return Tri::Yes;  // no inequality constraints at all
            case SetForm::Box: {
                const auto& d = std::get<detail::BoxData>(data_);
                for (Index i = 0; i < dim_; ++i)
                    if (!(d.lower[i] < d.upper[i])) return Tri::No;
                return Tri::Yes;
            }
            case SetForm::Ball:
                return std::get<detail::BallData>(data_).radius > 0.0 ? Tri::Yes : Tri::No;
            case SetForm::IntervalUnion1d: {
                for (const auto& iv : std::get<detail::IntervalUnionData>(data_).intervals)
                    if (iv.lo < iv.hi) return Tri::Yes;
                return Tri::No;
            }
            case SetForm::Product: {
                for (const auto& p : std::get<detail::ProductData>(data_).parts) {
                    Tri s = p.strictly_feasible_point_exists();
                    if (s != Tri::Yes) return s;
                }
                return Tri::Yes;
            }
            default:
                return Tri::Unknown;
        }
    }

    /// Conversion to equality/inequality constraints:
    ///   box            ->  l_i - x_i <= 0, x_i - u_i <= 0 (finite bounds only)
    ///   ball           ->  ||x - c||^2 - r^2 <= 0
    ///   interval union ->  prod_k (x - a_k)(x - b_k) <= 0
    ///   whole space    ->  no constraints
    FunctionalForm to_functional() const {
        FunctionalForm out;
        out.dim = dim_;
        std::visit(
            [&](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::WholeSpaceData>) {
                    // empty
                } else if constexpr (std::is_same_v<T, detail::BoxData>) {
                    for (Index i = 0; i < dim_; ++i) {
                        if (std::isfinite(d.lower[i])) {
                            double lo = d.lower[i];
                            Index idx = i;
                            Index n = dim_;
                            out.inequalities.push_back(SmoothConstraint{
                                [lo, idx](const Vector& x) { return lo - x[idx]; },
                                [idx, n](const Vector&) {
                                    Vector g = Vector::Zero(n);
                                    g[idx] = -1.0;
                                    return g;
                                },
                                "lower[" + std::to_string(i) + "]"});
                        }
                        if (std::isfinite(d.upper[i])) {
                            double hi = d.upper[i];
                            Index idx = i;
                            Index n = dim_;
                            out.inequalities.push_back(SmoothConstraint{
                                [hi, idx](const Vector& x) { return x[idx] - hi; },
                                [idx, n](const Vector&) {
                                    Vector g = Vector::Zero(n);
                                    g[idx] = 1.0;
                                    return g;
                                },
                                "upper[" + std::to_string(i) + "]"});
                        }
                    }
                } else if constexpr (std::is_same_v<T, detail::BallData>) {
                    Vector c = d.center;
                    double r2 = d.radius * d.radius;
                    out.inequalities.push_back(SmoothConstraint{
                        [c, r2](const Vector& x) { return (x - c).squaredNorm() - r2; },
                        [c](const Vector& x) { return Vector(2.0 * (x - c)); }, "ball"});
                } else if constexpr (std::is_same_v<T, detail::IntervalUnionData>) {
                    // roots of the membership polynomial, one pair per interval
                    std::vector<double> roots;
                    for (const auto& iv : d.intervals) {
                        roots.push_back(iv.lo);
                        roots.push_back(iv.hi);
                    }
                    out.inequalities.push_back(SmoothConstraint{
                        [roots](const Vector& x) {
                            double p = 1.0;
                            for (double r : roots) p *= (x[0] - r);
                            return p;
                        },
                        [roots](const Vector& x) {
                            double dp = 0.0;
                            for (std::size_t j = 0; j < roots.size(); ++j) {
                                double term = 1.0;
                                for (std::size_t k = 0; k < roots.size(); ++k)
                                    if (k != j) term *= (x[0] - roots[k]);
                                dp += term;
                            }
                            Vector g(1);
                            g[0] = dp;
                            return g;
                        },
                        "interval-union"});
                } else if constexpr (std::is_same_v<T, detail::FunctionalData>) {
                    out = *d.form;
                } else {
                    const detail::ProductData& prod = d;
                    for (std::size_t k = 0; k < prod.parts.size(); ++k) {
                        FunctionalForm sub = prod.parts[k].to_functional();
                        Index off = prod.offsets[k];
                        Index n = prod.parts[k].dimension();
                        Index full = dim_;
                        auto lift = [off, n, full](const SmoothConstraint& c, const std::string& tag) {
                            auto val = c.value;
                            auto grad = c.gradient;
                            return SmoothConstraint{
                                [val, off, n](const Vector& x) { return val(x.segment(off, n)); },
                                [grad, off, n, full](const Vector& x) {
                                    Vector g = Vector::Zero(full);
                                    g.segment(off, n) = grad(x.segment(off, n));
                                    return g;
                                },
                                tag};
                        };
                        for (const auto& c : sub.equalities)
                            out.equalities.push_back(lift(c, "part" + std::to_string(k) + ":" + c.label));
                        for (const auto& c : sub.inequalities)
                            out.inequalities.push_back(lift(c, "part" + std::to_string(k) + ":" + c.label));
                    }
                }
            },
            data_);
        return out;
    }

    /// Accessors for the solvers.
    const std::vector<Interval>& intervals() const {
        return std::get<detail::IntervalUnionData>(data_).intervals;
    }
    const detail::SetData& data() const { return data_; }

private:
    ConstraintSet(Index dim, detail::SetData data) : dim_(dim), data_(std::move(data)) {}

    void check_dim(const Vector& v) const {
        if (v.size() != dim_)
            throw std::invalid_argument("constraint set: argument has dimension " +
                                        std::to_string(v.size()) + ", expected " +
                                        std::to_string(dim_));
    }

    Index dim_;
    detail::SetData data_;
};

}  // namespace adlm
