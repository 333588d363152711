#pragma once

#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "adlm/problem.hpp"

namespace adlm {

namespace detail {

[[noreturn]] inline void spec_error(const std::string& where, const std::string& what) {
    throw std::invalid_argument("problem spec: " + where + ": " + what);
}

inline double bound_from_json(const nlohmann::json& v, double infinity_sign,
                              const std::string& where) {
    if (v.is_null()) return infinity_sign * std::numeric_limits<double>::infinity();
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    spec_error(where, "expected a number, null, or \"inf\"/\"-inf\"");
}

inline Vector vector_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array()) spec_error(where, "expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) spec_error(where + "[" + std::to_string(i) + "]", "expected a number");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) spec_error(where, "expected a non-empty array of rows");
    const std::size_t cols = j[0].size();
    Matrix M(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            spec_error(where + "[" + std::to_string(r) + "]", "rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c)
            M(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
    }
    return M;
}

}  // namespace detail

inline ObjectiveBlock block_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind"))
        detail::spec_error(where, "expected an object with a \"kind\" tag");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "zero") {
            return ObjectiveBlock::zero(j.at("dimension").get<Index>());
        } else if (kind == "quadratic") {
            return ObjectiveBlock::quadratic(detail::matrix_from_json(j.at("Q"), where + ".Q"),
                                             detail::vector_from_json(j.at("q"), where + ".q"));
        } else if (kind == "polynomial-1d") {
            return ObjectiveBlock::polynomial1d(j.at("coefficients").get<std::vector<double>>());
        } else if (kind == "cosine-1d") {
            return ObjectiveBlock::cosine1d(j.value("amplitude", 1.0), j.value("phase", 0.0));
        } else if (kind == "negative-square-1d") {
            return ObjectiveBlock::negative_square_1d();
        } else if (kind == "huber") {
            return ObjectiveBlock::huber(j.at("dimension").get<Index>(), j.at("delta").get<double>());
        } else if (kind == "range-residual") {
            std::vector<RangeTerm> terms;
            for (const auto& tj : j.at("terms")) {
                RangeTerm t;
                t.first = tj.at("first").get<Index>();
                if (tj.contains("second") && !tj.at("second").is_null())
                    t.second = tj.at("second").get<Index>();
                if (tj.contains("anchor")) {
                    auto a = detail::vector_from_json(tj.at("anchor"), where + ".terms.anchor");
                    if (a.size() != 2) detail::spec_error(where + ".terms.anchor", "expected 2 numbers");
                    t.anchor = a.head<2>();
                }
                t.measured_sq = tj.at("d2").get<double>();
                terms.push_back(t);
            }
            return ObjectiveBlock::range_residual(j.at("dimension").get<Index>(), std::move(terms));
        } else if (kind == "sum") {
            std::vector<ObjectiveBlock> parts;
            std::vector<std::vector<Index>> maps;
            const auto& pj = j.at("parts");
            const auto& mj = j.at("maps");
            if (pj.size() != mj.size()) detail::spec_error(where, "parts and maps differ in length");
            for (std::size_t k = 0; k < pj.size(); ++k) {
                parts.push_back(block_from_json(pj[k], where + ".parts[" + std::to_string(k) + "]"));
                maps.push_back(mj[k].get<std::vector<Index>>());
            }
            return ObjectiveBlock::sum(std::move(parts), std::move(maps));
        }
    } catch (const nlohmann::json::exception& e) {
        detail::spec_error(where, e.what());
    }
    detail::spec_error(where, "unknown block kind \"" + kind + "\"");
}

inline ConstraintSet set_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("form"))
        detail::spec_error(where, "expected an object with a \"form\" tag");
    const std::string form = j.at("form").get<std::string>();
    try {
        if (form == "whole-space") {
            return ConstraintSet::whole_space(j.at("dimension").get<Index>());
        } else if (form == "box") {
            const auto& lj = j.at("lower");
            const auto& uj = j.at("upper");
            if (!lj.is_array() || !uj.is_array() || lj.size() != uj.size())
                detail::spec_error(where, "box needs equal-length lower/upper arrays");
            Vector lo(static_cast<Index>(lj.size())), hi(static_cast<Index>(uj.size()));
            for (std::size_t i = 0; i < lj.size(); ++i) {
                lo[static_cast<Index>(i)] = detail::bound_from_json(lj[i], -1.0, where + ".lower");
                hi[static_cast<Index>(i)] = detail::bound_from_json(uj[i], 1.0, where + ".upper");
            }
            return ConstraintSet::box(std::move(lo), std::move(hi));
        } else if (form == "ball") {
            return ConstraintSet::ball(detail::vector_from_json(j.at("center"), where + ".center"),
                                       j.at("radius").get<double>());
        } else if (form == "interval-union-1d") {
            std::vector<Interval> intervals;
            for (const auto& iv : j.at("intervals")) {
                if (!iv.is_array() || iv.size() != 2)
                    detail::spec_error(where + ".intervals", "each interval is [lo, hi]");
                intervals.push_back(Interval{iv[0].get<double>(), iv[1].get<double>()});
            }
            return ConstraintSet::interval_union(std::move(intervals));
        } else if (form == "functional") {
            detail::spec_error(where,
                               "functional sets are in-process only and cannot be loaded from a file");
        }
    } catch (const nlohmann::json::exception& e) {
        detail::spec_error(where, e.what());
    }
    detail::spec_error(where, "unknown set form \"" + form + "\"");
}

namespace detail {

inline Matrix coupling_from_json(const nlohmann::json& j, Index rows_hint, Index cols,
                                 const std::string& where) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        Index n = rows_hint > 0 ? rows_hint : cols;
        if (n != cols)
            spec_error(where, "\"" + s + "\" shorthand needs square coupling (rows == block dim)");
        if (s == "identity") return Matrix::Identity(n, n);
        if (s == "neg-identity") return Matrix(-Matrix::Identity(n, n));
        spec_error(where, "unknown shorthand \"" + s + "\" (use \"identity\" or \"neg-identity\")");
    }
    Matrix M = matrix_from_json(j, where);
    if (M.cols() != cols)
        spec_error(where, "has " + std::to_string(M.cols()) + " columns, expected " +
                              std::to_string(cols));
    return M;
}

}  // namespace detail

/// Parses the problem-spec document
///   { f, g, A, B, c?, X, Z }
/// where f/g use the block kind tags, X/Z the set form tags, A/B are dense
/// row-major arrays or the "identity"/"neg-identity" shorthands, and c
/// defaults to zero.
inline StructuredProblem problem_from_json(const nlohmann::json& j) {
    if (!j.is_object()) detail::spec_error("$", "expected a JSON object");
    for (const char* key : {"f", "g", "A", "B", "X", "Z"})
        if (!j.contains(key)) detail::spec_error("$", std::string("missing field \"") + key + "\"");

    ObjectiveBlock f = block_from_json(j.at("f"), "f");
    ObjectiveBlock g = block_from_json(j.at("g"), "g");

    Index rows_hint = 0;
    Vector c;
    if (j.contains("c")) {
        c = detail::vector_from_json(j.at("c"), "c");
        rows_hint = c.size();
    }
    Matrix A = detail::coupling_from_json(j.at("A"), rows_hint, f.dimension(), "A");
    Matrix B = detail::coupling_from_json(j.at("B"), A.rows(), g.dimension(), "B");
    if (c.size() == 0) c = Vector::Zero(A.rows());

    ConstraintSet X = set_from_json(j.at("X"), "X");
    ConstraintSet Z = set_from_json(j.at("Z"), "Z");
    return StructuredProblem(std::move(f), std::move(g), std::move(A), std::move(B), std::move(c),
                             std::move(X), std::move(Z));
}

inline StructuredProblem load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read problem file: " + path);
    // parsing from a string (not the stream) makes the library report
    // line/column positions in its diagnostics
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("problem spec: " + path + ": " + e.what());
    }
    return problem_from_json(j);
}

}  // namespace adlm
