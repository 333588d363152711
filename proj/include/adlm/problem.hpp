#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "adlm/objective.hpp"
#include "adlm/sets.hpp"

namespace adlm {

enum class VariableBlock { X, Z };

/// minimize f(x) + g(z)  subject to  x in X, z in Z, A x + B z = c.
/// Feasibility is not asserted at construction; solvers and certificates
/// check it.
struct StructuredProblem {
    ObjectiveBlock f;
    ObjectiveBlock g;
    Matrix A;  // q x p1
    Matrix B;  // q x p2
    Vector c;  // q
    ConstraintSet X;
    ConstraintSet Z;

    StructuredProblem(ObjectiveBlock f_, ObjectiveBlock g_, Matrix A_, Matrix B_, Vector c_,
                      ConstraintSet X_, ConstraintSet Z_)
        : f(std::move(f_)),
          g(std::move(g_)),
          A(std::move(A_)),
          B(std::move(B_)),
          c(std::move(c_)),
          X(std::move(X_)),
          Z(std::move(Z_)) {
        if (A.cols() != f.dimension())
            throw std::invalid_argument("structured problem: A has " + std::to_string(A.cols()) +
                                        " columns, f has dimension " + std::to_string(f.dimension()));
        if (B.cols() != g.dimension())
            throw std::invalid_argument("structured problem: B has " + std::to_string(B.cols()) +
                                        " columns, g has dimension " + std::to_string(g.dimension()));
        if (A.rows() != B.rows() || A.rows() != c.size())
            throw std::invalid_argument("structured problem: A, B, c row counts differ");
        if (X.dimension() != f.dimension() || Z.dimension() != g.dimension())
            throw std::invalid_argument("structured problem: set dimensions do not match objectives");
    }

    Index x_dim() const { return A.cols(); }
    Index z_dim() const { return B.cols(); }
    Index coupling_dim() const { return c.size(); }
};

/// (x, z, y, rho) with y the coupling multiplier and rho the penalty.
struct PrimalDualPoint {
    Vector x;
    Vector z;
    Vector y;
    double rho = 1.0;
};

inline void check_point(const StructuredProblem& p, const Vector& x, const Vector& z) {
    if (x.size() != p.x_dim() || z.size() != p.z_dim())
        throw std::invalid_argument("point dimensions do not match the problem");
}

inline double eval_objective(const StructuredProblem& p, const Vector& x, const Vector& z) {
    check_point(p, x, z);
    return p.f.value(x) + p.g.value(z);
}

inline Vector coupling_residual(const StructuredProblem& p, const Vector& x, const Vector& z) {
    check_point(p, x, z);
    return p.A * x + p.B * z - p.c;
}

/// ||A x + B z - c|| (2-norm).
inline double eval_primal_residual(const StructuredProblem& p, const Vector& x, const Vector& z) {
    return coupling_residual(p, x, z).norm();
}

/// f(x) + g(z) + y'(Ax + Bz - c) + (rho/2) ||Ax + Bz - c||^2.
inline double eval_aug_lagrangian(const StructuredProblem& p, const PrimalDualPoint& pt) {
    if (!(pt.rho > 0.0)) throw std::invalid_argument("augmented Lagrangian: rho must be positive");
    if (pt.y.size() != p.coupling_dim())
        throw std::invalid_argument("augmented Lagrangian: multiplier dimension mismatch");
    Vector r = coupling_residual(p, pt.x, pt.z);
    return p.f.value(pt.x) + p.g.value(pt.z) + pt.y.dot(r) + 0.5 * pt.rho * r.squaredNorm();
}

/// Block gradient of the augmented Lagrangian:
///   x block:  grad f(x) + A'y + rho A'(Ax + Bz - c)
///   z block:  grad g(z) + B'y + rho B'(Ax + Bz - c)
inline Vector grad_aug_lagrangian(const StructuredProblem& p, const PrimalDualPoint& pt,
                                  VariableBlock block) {
    if (!(pt.rho > 0.0)) throw std::invalid_argument("augmented Lagrangian: rho must be positive");
    Vector r = coupling_residual(p, pt.x, pt.z);
    if (block == VariableBlock::X)
        return p.f.gradient(pt.x) + p.A.transpose() * (pt.y + pt.rho * r);
    return p.g.gradient(pt.z) + p.B.transpose() * (pt.y + pt.rho * r);
}

}  // namespace adlm
