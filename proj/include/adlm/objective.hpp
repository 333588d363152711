#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "adlm/types.hpp"

namespace adlm {

enum class BlockKind {
    Zero,
    Quadratic,
    Polynomial1d,
    Cosine1d,
    NegativeSquare1d,
    Huber,
    RangeResidual,
    Sum,
};

inline const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::Zero: return "zero";
        case BlockKind::Quadratic: return "quadratic";
        case BlockKind::Polynomial1d: return "polynomial-1d";
        case BlockKind::Cosine1d: return "cosine-1d";
        case BlockKind::NegativeSquare1d: return "negative-square-1d";
        case BlockKind::Huber: return "huber";
        case BlockKind::RangeResidual: return "range-residual";
        case BlockKind::Sum: return "sum";
    }
    return "?";
}

/// One squared-range residual |d2 - ||p_first - p_second||^2|^2 where the
/// points are consecutive 2-d blocks of the argument vector. When
/// `second < 0` the second point is the fixed `anchor`.
struct RangeTerm {
    Index first = 0;
    Index second = -1;
    Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
    double measured_sq = 0.0;
};

class ObjectiveBlock;

namespace detail {

struct ZeroData {};

struct QuadraticData {
    Matrix Q;  // symmetric; value is x'Qx + q'x
    Vector q;
};

struct PolynomialData {
    std::vector<double> coeffs;  // ascending powers
};

struct CosineData {
    double amplitude;
    double phase;  // value is amplitude * cos(x + phase)
};

struct NegativeSquareData {};

struct HuberData {
    double delta;  // componentwise sum of Huber losses
};

struct RangeResidualData {
    std::vector<RangeTerm> terms;
};

struct SumData {
    std::vector<ObjectiveBlock> parts;
    std::vector<std::vector<Index>> maps;  // global index of each part coordinate
};

using BlockData = std::variant<ZeroData, QuadraticData, PolynomialData, CosineData,
                               NegativeSquareData, HuberData, RangeResidualData, SumData>;

inline double huber_value(double u, double delta) {
    double a = std::abs(u);
    return a <= delta ? 0.5 * u * u : delta * (a - 0.5 * delta);
}

inline double huber_slope(double u, double delta) {
    return u > delta ? delta : (u < -delta ? -delta : u);
}

}  // namespace detail

/// A building block of the separable objective. Every kind provides a total
/// value and gradient evaluator; 1-d kinds additionally expose derivatives
/// and, where they exist, analytic gradient-Lipschitz constants.
class ObjectiveBlock {
public:
    static ObjectiveBlock zero(Index dim) {
        return ObjectiveBlock(dim, detail::ZeroData{});
    }

    /// x'Qx + q'x; Q is symmetrized on construction.
    static ObjectiveBlock quadratic(Matrix Q, Vector q) {
        if (Q.rows() != Q.cols() || Q.rows() != q.size())
            throw std::invalid_argument("quadratic block: Q must be square and match q");
        const Index dim = q.size();
        Matrix sym = 0.5 * (Q + Q.transpose());
        return ObjectiveBlock(dim, detail::QuadraticData{std::move(sym), std::move(q)});
    }

    /// sum_k coeffs[k] * x^k (ascending powers), dimension 1.
    static ObjectiveBlock polynomial1d(std::vector<double> coeffs) {
        if (coeffs.empty()) coeffs.push_back(0.0);
        return ObjectiveBlock(1, detail::PolynomialData{std::move(coeffs)});
    }

    /// amplitude * cos(x + phase), dimension 1. sine(x) == cosine1d(1, -pi/2).
    static ObjectiveBlock cosine1d(double amplitude, double phase) {
        return ObjectiveBlock(1, detail::CosineData{amplitude, phase});
    }

    static ObjectiveBlock negative_square_1d() {
        return ObjectiveBlock(1, detail::NegativeSquareData{});
    }

    /// Componentwise Huber loss with knee `delta`.
    static ObjectiveBlock huber(Index dim, double delta) {
        if (delta <= 0.0) throw std::invalid_argument("huber block: delta must be positive");
        return ObjectiveBlock(dim, detail::HuberData{delta});
    }

    /// Sum of squared-range residuals over 2-d position blocks; `dim` is the
    /// full vector dimension (2 * number of position blocks).
    static ObjectiveBlock range_residual(Index dim, std::vector<RangeTerm> terms) {
        if (dim % 2 != 0) throw std::invalid_argument("range-residual block: dimension must be even");
        Index blocks = dim / 2;
        for (const auto& t : terms) {
            if (t.first < 0 || t.first >= blocks || t.second >= blocks)
                throw std::invalid_argument("range-residual block: term index out of range");
        }
        return ObjectiveBlock(dim, detail::RangeResidualData{std::move(terms)});
    }

    /// f(x) = sum_k parts[k](x[maps[k]]). Index maps may overlap.
    static ObjectiveBlock sum(std::vector<ObjectiveBlock> parts,
                              std::vector<std::vector<Index>> maps) {
        if (parts.size() != maps.size())
            throw std::invalid_argument("sum block: one index map per part required");
        Index dim = 0;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (static_cast<Index>(maps[k].size()) != parts[k].dimension())
                throw std::invalid_argument("sum block: index map size must match part dimension");
            for (Index i : maps[k]) {
                if (i < 0) throw std::invalid_argument("sum block: negative index");
                dim = std::max(dim, i + 1);
            }
        }
        return ObjectiveBlock(dim, detail::SumData{std::move(parts), std::move(maps)});
    }

    Index dimension() const { return dim_; }

    BlockKind kind() const {
        return static_cast<BlockKind>(data_.index());
    }

    double value(const Vector& x) const {
        check_dim(x);
        return value_unchecked(x);
    }

    Vector gradient(const Vector& x) const {
        check_dim(x);
        Vector g = Vector::Zero(dim_);
        add_gradient(x, g);
        return g;
    }

    /// 1-d derivative; only valid when dimension() == 1.
    double derivative(double x) const {
        require_1d();
        Vector v(1);
        v[0] = x;
        return gradient(v)[0];
    }

    /// 1-d second derivative (piecewise value at Huber knees); used by the
    /// safeguarded Newton polish. Only valid when dimension() == 1.
    double second_derivative(double x) const {
        require_1d();
        return std::visit(
            [&](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::ZeroData>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, detail::QuadraticData>) {
                    return 2.0 * d.Q(0, 0);
                } else if constexpr (std::is_same_v<T, detail::PolynomialData>) {
                    double acc = 0.0;
                    for (std::size_t k = d.coeffs.size(); k-- > 2;)
                        acc = acc * x + d.coeffs[k] * static_cast<double>(k) * static_cast<double>(k - 1);
                    return acc;
                } else if constexpr (std::is_same_v<T, detail::CosineData>) {
                    return -d.amplitude * std::cos(x + d.phase);
                } else if constexpr (std::is_same_v<T, detail::NegativeSquareData>) {
                    return -2.0;
                } else if constexpr (std::is_same_v<T, detail::HuberData>) {
                    return std::abs(x) <= d.delta ? 1.0 : 0.0;
                } else if constexpr (std::is_same_v<T, detail::SumData>) {
                    double acc = 0.0;
                    for (const auto& part : d.parts) acc += part.second_derivative(x);
                    return acc;
                } else {
                    throw std::invalid_argument("second_derivative: unsupported block kind");
                }
            },
            data_);
    }

    /// Analytic Lipschitz constant of the gradient where the registry knows
    /// one (1-d kinds and their sums); nullopt otherwise.
    std::optional<double> gradient_lipschitz() const {
        return std::visit(
            [&](const auto& d) -> std::optional<double> {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::ZeroData>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, detail::QuadraticData>) {
                    if (dim_ == 1) return 2.0 * std::abs(d.Q(0, 0));
                    Eigen::SelfAdjointEigenSolver<Matrix> es(d.Q);
                    return 2.0 * es.eigenvalues().cwiseAbs().maxCoeff();
                } else if constexpr (std::is_same_v<T, detail::PolynomialData>) {
                    if (d.coeffs.size() <= 2) return 0.0;
                    if (d.coeffs.size() == 3) return 2.0 * std::abs(d.coeffs[2]);
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, detail::CosineData>) {
                    return std::abs(d.amplitude);
                } else if constexpr (std::is_same_v<T, detail::NegativeSquareData>) {
                    return 2.0;
                } else if constexpr (std::is_same_v<T, detail::HuberData>) {
                    return 1.0;
                } else if constexpr (std::is_same_v<T, detail::SumData>) {
                    if (dim_ != 1) return std::nullopt;
                    double acc = 0.0;
                    for (const auto& part : d.parts) {
                        auto l = part.gradient_lipschitz();
                        if (!l) return std::nullopt;
                        acc += *l;
                    }
                    return acc;
                } else {
                    return std::nullopt;
                }
            },
            data_);
    }

    /// sup ||grad|| (2-norm) when finite and known analytically.
    std::optional<double> gradient_bound() const {
        return std::visit(
            [&](const auto& d) -> std::optional<double> {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::ZeroData>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, detail::QuadraticData>) {
                    if (d.Q.cwiseAbs().maxCoeff() == 0.0) return d.q.norm();
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, detail::PolynomialData>) {
                    if (d.coeffs.size() <= 1) return 0.0;
                    if (d.coeffs.size() == 2) return std::abs(d.coeffs[1]);
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, detail::CosineData>) {
                    return std::abs(d.amplitude);
                } else if constexpr (std::is_same_v<T, detail::HuberData>) {
                    return d.delta * std::sqrt(static_cast<double>(dim_));
                } else if constexpr (std::is_same_v<T, detail::SumData>) {
                    double acc = 0.0;
                    for (const auto& part : d.parts) {
                        auto b = part.gradient_bound();
                        if (!b) return std::nullopt;
                        acc += *b;
                    }
                    return acc;
                } else {
                    return std::nullopt;
                }
            },
            data_);
    }

    Tri is_convex() const {
        return std::visit(
            [&](const auto& d) -> Tri {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::ZeroData>) {
                    return Tri::Yes;
                } else if constexpr (std::is_same_v<T, detail::QuadraticData>) {
                    Eigen::SelfAdjointEigenSolver<Matrix> es(d.Q);
                    return es.eigenvalues().minCoeff() >= -1e-12 ? Tri::Yes : Tri::No;
                } else if constexpr (std::is_same_v<T, detail::PolynomialData>) {
                    if (d.coeffs.size() <= 2) return Tri::Yes;
                    if (d.coeffs.size() == 3) return d.coeffs[2] >= 0.0 ? Tri::Yes : Tri::No;
                    return Tri::Unknown;
                } else if constexpr (std::is_same_v<T, detail::CosineData>) {
                    return d.amplitude == 0.0 ? Tri::Yes : Tri::No;
                } else if constexpr (std::is_same_v<T, detail::NegativeSquareData>) {
                    return Tri::No;
                } else if constexpr (std::is_same_v<T, detail::HuberData>) {
                    return Tri::Yes;
                } else if constexpr (std::is_same_v<T, detail::RangeResidualData>) {
                    return d.terms.empty() ? Tri::Yes : Tri::Unknown;
                } else {
                    const detail::SumData& s = d;
                    bool all_yes = true;
                    for (const auto& part : s.parts) {
                        Tri c = part.is_convex();
                        if (c == Tri::No || c == Tri::Unknown) all_yes = false;
                    }
                    return all_yes ? Tri::Yes : Tri::Unknown;
                }
            },
            data_);
    }

    bool is_zero() const { return kind() == BlockKind::Zero; }

    /// Accessors used by the solvers and serializers.
    const detail::BlockData& data() const { return data_; }

private:
    ObjectiveBlock(Index dim, detail::BlockData data) : dim_(dim), data_(std::move(data)) {
        if (dim_ <= 0) throw std::invalid_argument("objective block: dimension must be positive");
    }

    void check_dim(const Vector& x) const {
        if (x.size() != dim_)
            throw std::invalid_argument("objective block: argument has dimension " +
                                        std::to_string(x.size()) + ", expected " +
                                        std::to_string(dim_));
    }

    void require_1d() const {
        if (dim_ != 1) throw std::invalid_argument("operation requires a 1-d block");
    }

    double value_unchecked(const Vector& x) const {
        return std::visit(
            [&](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::ZeroData>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, detail::QuadraticData>) {
                    return x.dot(d.Q * x) + d.q.dot(x);
                } else if constexpr (std::is_same_v<T, detail::PolynomialData>) {
                    double acc = 0.0;
                    for (std::size_t k = d.coeffs.size(); k-- > 0;) acc = acc * x[0] + d.coeffs[k];
                    return acc;
                } else if constexpr (std::is_same_v<T, detail::CosineData>) {
                    return d.amplitude * std::cos(x[0] + d.phase);
                } else if constexpr (std::is_same_v<T, detail::NegativeSquareData>) {
                    return -x[0] * x[0];
                } else if constexpr (std::is_same_v<T, detail::HuberData>) {
                    double acc = 0.0;
                    for (Index i = 0; i < x.size(); ++i) acc += detail::huber_value(x[i], d.delta);
                    return acc;
                } else if constexpr (std::is_same_v<T, detail::RangeResidualData>) {
                    double acc = 0.0;
                    for (const auto& t : d.terms) {
                        Eigen::Vector2d u = x.segment<2>(2 * t.first);
                        if (t.second >= 0)
                            u -= Eigen::Vector2d(x.segment<2>(2 * t.second));
                        else
                            u -= t.anchor;
                        double resid = t.measured_sq - u.squaredNorm();
                        acc += resid * resid;
                    }
                    return acc;
                } else {
                    const detail::SumData& s = d;
                    double acc = 0.0;
                    for (std::size_t k = 0; k < s.parts.size(); ++k) {
                        Vector sub(s.maps[k].size());
                        for (std::size_t i = 0; i < s.maps[k].size(); ++i)
                            sub[static_cast<Index>(i)] = x[s.maps[k][i]];
                        acc += s.parts[k].value_unchecked(sub);
                    }
                    return acc;
                }
            },
            data_);
    }

    void add_gradient(const Vector& x, Vector& g) const {
        std::visit(
            [&](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::ZeroData>) {
                    // nothing
                } else if constexpr (std::is_same_v<T, detail::QuadraticData>) {
                    g.noalias() += 2.0 * (d.Q * x) + d.q;
                } else if constexpr (std::is_same_v<T, detail::PolynomialData>) {
                    double acc = 0.0;
                    for (std::size_t k = d.coeffs.size(); k-- > 1;)
                        acc = acc * x[0] + d.coeffs[k] * static_cast<double>(k);
                    g[0] += acc;
                } else if constexpr (std::is_same_v<T, detail::CosineData>) {
                    g[0] += -d.amplitude * std::sin(x[0] + d.phase);
                } else if constexpr (std::is_same_v<T, detail::NegativeSquareData>) {
                    g[0] += -2.0 * x[0];
                } else if constexpr (std::is_same_v<T, detail::HuberData>) {
                    for (Index i = 0; i < x.size(); ++i) g[i] += detail::huber_slope(x[i], d.delta);
                } else if constexpr (std::is_same_v<T, detail::RangeResidualData>) {
                    for (const auto& t : d.terms) {
                        Eigen::Vector2d u = x.segment<2>(2 * t.first);
                        if (t.second >= 0)
                            u -= Eigen::Vector2d(x.segment<2>(2 * t.second));
                        else
                            u -= t.anchor;
                        double resid = t.measured_sq - u.squaredNorm();
                        Eigen::Vector2d du = -4.0 * resid * u;
                        g.segment<2>(2 * t.first) += du;
                        if (t.second >= 0) g.segment<2>(2 * t.second) -= du;
                    }
                } else {
                    const detail::SumData& s = d;
                    for (std::size_t k = 0; k < s.parts.size(); ++k) {
                        Vector sub(s.maps[k].size());
                        for (std::size_t i = 0; i < s.maps[k].size(); ++i)
                            sub[static_cast<Index>(i)] = x[s.maps[k][i]];
                        Vector gsub = Vector::Zero(sub.size());
                        s.parts[k].add_gradient(sub, gsub);
                        for (std::size_t i = 0; i < s.maps[k].size(); ++i)
                            g[s.maps[k][i]] += gsub[static_cast<Index>(i)];
                    }
                }
            },
            data_);
    }

    Index dim_;
    detail::BlockData data_;
};

/// Convenience: sine as a phase-shifted cosine.
inline ObjectiveBlock sine1d() { return ObjectiveBlock::cosine1d(1.0, -M_PI / 2.0); }

}  // namespace adlm
