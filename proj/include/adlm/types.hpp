#pragma once

#include <Eigen/Dense>

namespace adlm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Three-valued answer for structural queries that are not always decidable
/// from the stored form (e.g. convexity of a functional set).
enum class Tri { Yes, No, Unknown };

inline const char* to_string(Tri t) {
    switch (t) {
        case Tri::Yes: return "yes";
        case Tri::No: return "no";
        default: return "unknown";
    }
}

}  // namespace adlm
