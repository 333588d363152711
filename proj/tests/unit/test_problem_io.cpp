#include <catch2/catch_amalgamated.hpp>

#include "adlm/problem_io.hpp"

using namespace adlm;
using Catch::Approx;
using nlohmann::json;

namespace {

json consensus_spec() {
    return json::parse(R"({
        "f": {"kind": "polynomial-1d", "coefficients": [1, -2, 1]},
        "g": {"kind": "polynomial-1d", "coefficients": [4, -4, 1]},
        "A": [[1.0]],
        "B": [[-1.0]],
        "c": [0.0],
        "X": {"form": "whole-space", "dimension": 1},
        "Z": {"form": "whole-space", "dimension": 1}
    })");
}

}  // namespace

TEST_CASE("the consensus spec parses and evaluates") {
    StructuredProblem p = problem_from_json(consensus_spec());
    CHECK(p.x_dim() == 1);
    CHECK(eval_objective(p, Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)) ==
          Approx(0.0).margin(1e-15));
    CHECK(eval_objective(p, Vector::Zero(1), Vector::Zero(1)) == Approx(5.0));
}

TEST_CASE("identity shorthands expand against the block dimensions") {
    json spec = consensus_spec();
    spec["A"] = "identity";
    spec["B"] = "neg-identity";
    StructuredProblem p = problem_from_json(spec);
    CHECK(p.A(0, 0) == Approx(1.0));
    CHECK(p.B(0, 0) == Approx(-1.0));

    spec.erase("c");  // defaults to zero
    p = problem_from_json(spec);
    CHECK(p.c[0] == 0.0);
}

TEST_CASE("all set forms parse") {
    json spec = consensus_spec();
    spec["X"] = {{"form", "interval-union-1d"},
                 {"intervals", json::array({json::array({-1.0, 0.0}), json::array({1.0, 2.0})})}};
    spec["Z"] = {{"form", "box"}, {"lower", {0.0}}, {"upper", {3.0}}};
    StructuredProblem p = problem_from_json(spec);
    CHECK(p.X.form() == SetForm::IntervalUnion1d);
    CHECK(p.Z.form() == SetForm::Box);

    spec["Z"] = {{"form", "ball"}, {"center", {0.5}}, {"radius", 2.0}};
    CHECK(problem_from_json(spec).Z.form() == SetForm::Ball);

    spec["Z"] = {{"form", "box"}, {"lower", {nullptr}}, {"upper", {3.0}}};
    StructuredProblem half = problem_from_json(spec);
    CHECK(half.Z.bounding_box() == std::nullopt);
}

TEST_CASE("block kinds parse") {
    json spec = consensus_spec();
    spec["f"] = {{"kind", "huber"}, {"dimension", 1}, {"delta", 0.5}};
    spec["g"] = {{"kind", "cosine-1d"}, {"amplitude", 2.0}, {"phase", 0.25}};
    StructuredProblem p = problem_from_json(spec);
    CHECK(p.f.kind() == BlockKind::Huber);
    CHECK(p.g.value(Vector::Zero(1)) == Approx(2.0 * std::cos(0.25)));

    spec["f"] = {{"kind", "quadratic"}, {"Q", json::array({json::array({2.0})})}, {"q", {1.0}}};
    CHECK(problem_from_json(spec).f.kind() == BlockKind::Quadratic);

    spec["f"] = {{"kind", "range-residual"},
                 {"dimension", 4},
                 {"terms", json::array({json{{"first", 0}, {"second", 1}, {"d2", 1.0}},
                                        json{{"first", 0},
                                             {"second", nullptr},
                                             {"anchor", {0.0, 1.0}},
                                             {"d2", 0.5}}})}};
    spec["A"] = json::array({json::array({1.0, 0, 0, 0})});
    spec["X"] = {{"form", "whole-space"}, {"dimension", 4}};
    CHECK(problem_from_json(spec).f.kind() == BlockKind::RangeResidual);
}

TEST_CASE("malformed specs raise diagnostics naming the field") {
    json spec = consensus_spec();
    spec.erase("g");
    try {
        problem_from_json(spec);
        FAIL("expected a parse failure");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("\"g\"") != std::string::npos);
    }

    spec = consensus_spec();
    spec["f"] = {{"kind", "mystery"}};
    try {
        problem_from_json(spec);
        FAIL("expected a parse failure");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("mystery") != std::string::npos);
        CHECK(std::string(e.what()).find("f") != std::string::npos);
    }

    spec = consensus_spec();
    spec["X"] = {{"form", "functional"}};
    CHECK_THROWS_AS(problem_from_json(spec), std::invalid_argument);

    spec = consensus_spec();
    spec["A"] = json::array({json::array({1.0, 2.0})});  // wrong column count
    CHECK_THROWS_AS(problem_from_json(spec), std::invalid_argument);
}
