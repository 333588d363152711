#pragma once

// Test-only oracle: central finite differences of a block's value function.
// Independent of the analytic gradient path it checks.

#include "adlm/objective.hpp"

namespace adlm::testing {

inline Vector fd_gradient(const ObjectiveBlock& block, const Vector& x) {
    const double h = 1e-6 * (1.0 + x.norm());
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vector hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (block.value(hi) - block.value(lo)) / (2.0 * h);
    }
    return g;
}

/// Relative agreement measure used across the gradient checks:
/// ||fd - analytic|| / (1 + ||analytic||).
inline double fd_relative_error(const ObjectiveBlock& block, const Vector& x) {
    Vector analytic = block.gradient(x);
    Vector fd = fd_gradient(block, x);
    return (fd - analytic).norm() / (1.0 + analytic.norm());
}

}  // namespace adlm::testing
