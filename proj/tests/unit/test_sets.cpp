#include <catch2/catch_amalgamated.hpp>

#include "adlm/rng.hpp"
#include "adlm/sets.hpp"

using namespace adlm;
using Catch::Approx;

namespace {
Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}
}  // namespace

TEST_CASE("box projection") {
    auto set = ConstraintSet::box(Vector::Zero(2), Vector::Ones(2));
    Vector p = set.project(vec2(2.0, -1.0));
    CHECK(p[0] == Approx(1.0));
    CHECK(p[1] == Approx(0.0));
    CHECK(set.contains(p));
}

TEST_CASE("interval union projection and tie rule") {
    auto set = ConstraintSet::interval_union({Interval{-1.0, 0.0}, Interval{1.0, 2.0}});
    CHECK(set.project(Vector::Constant(1, 0.4))[0] == Approx(0.0));
    // exact tie between 0 and 1 resolves toward the smaller left endpoint
    CHECK(set.project(Vector::Constant(1, 0.5))[0] == Approx(0.0));
    CHECK(set.project(Vector::Constant(1, 0.6))[0] == Approx(1.0));
    CHECK(set.project(Vector::Constant(1, -0.5))[0] == Approx(-0.5));
    CHECK_THROWS_AS(ConstraintSet::interval_union({Interval{0.0, 2.0}, Interval{1.0, 3.0}}),
                    std::invalid_argument);
}

TEST_CASE("ball projection") {
    auto set = ConstraintSet::ball(vec2(1.0, 1.0), 2.0);
    Vector p = set.project(vec2(1.0, 5.0));
    CHECK(p[0] == Approx(1.0));
    CHECK(p[1] == Approx(3.0));
    CHECK(set.project(vec2(1.5, 1.5)) == vec2(1.5, 1.5));
}

TEST_CASE("projection is idempotent, and nonexpansive on convex forms") {
    RandomStream rng(77, 0);
    auto box = ConstraintSet::box(Vector::Constant(3, -1.0), Vector::Constant(3, 2.0));
    auto ball = ConstraintSet::ball(Vector::Zero(3), 1.5);
    auto uni = ConstraintSet::interval_union({Interval{-2.0, -1.0}, Interval{0.5, 0.75}});

    for (int trial = 0; trial < 200; ++trial) {
        Vector u(3), v(3);
        for (Index i = 0; i < 3; ++i) {
            u[i] = rng.uniform(-5.0, 5.0);
            v[i] = rng.uniform(-5.0, 5.0);
        }
        for (const auto* set : {&box, &ball}) {
            Vector pu = set->project(u), pv = set->project(v);
            CHECK((set->project(pu) - pu).norm() <= 1e-14);
            CHECK((pu - pv).norm() <= (u - v).norm() + 1e-12);
        }
        Vector s = Vector::Constant(1, rng.uniform(-4.0, 4.0));
        Vector ps = uni.project(s);
        CHECK((uni.project(ps) - ps).norm() <= 1e-14);
    }
}

TEST_CASE("functional conversion keeps membership semantics") {
    auto uni = ConstraintSet::interval_union({Interval{-1.0, 0.0}, Interval{1.0, 2.0}});
    auto form = uni.to_functional();
    REQUIRE(form.inequalities.size() == 1);
    const auto& q = form.inequalities[0];
    // the membership polynomial is nonpositive exactly on the union
    CHECK(q.value(Vector::Constant(1, -0.5)) <= 0.0);
    CHECK(q.value(Vector::Constant(1, 1.5)) <= 0.0);
    CHECK(q.value(Vector::Constant(1, 0.5)) > 0.0);
    CHECK(q.value(Vector::Constant(1, -1.5)) > 0.0);
    CHECK(q.value(Vector::Constant(1, 3.0)) > 0.0);
    // gradient at an endpoint is nonzero (regular boundary)
    CHECK(std::abs(q.gradient(Vector::Constant(1, 0.0))[0]) > 1e-6);

    auto box = ConstraintSet::box(vec2(0.0, 0.0), vec2(1.0, 1.0));
    auto bf = box.to_functional();
    CHECK(bf.inequalities.size() == 4);
    CHECK(box.violation(vec2(2.0, 0.5)) == Approx(1.0));

    auto ball = ConstraintSet::ball(Vector::Zero(2), 1.0);
    auto lf = ball.to_functional();
    REQUIRE(lf.inequalities.size() == 1);
    CHECK(lf.inequalities[0].value(vec2(2.0, 0.0)) == Approx(3.0));
}

TEST_CASE("structural queries") {
    auto whole = ConstraintSet::whole_space(2);
    auto box = ConstraintSet::box(vec2(0.0, 0.0), vec2(1.0, 1.0));
    auto uni2 = ConstraintSet::interval_union({Interval{-1.0, 0.0}, Interval{1.0, 2.0}});
    auto uni1 = ConstraintSet::interval_union({Interval{-1.0, 0.0}});

    CHECK(whole.convex() == Tri::Yes);
    CHECK(whole.compact() == Tri::No);
    CHECK(box.convex() == Tri::Yes);
    CHECK(box.compact() == Tri::Yes);
    CHECK(box.strictly_feasible_point_exists() == Tri::Yes);
    CHECK(uni2.convex() == Tri::No);
    CHECK(uni1.convex() == Tri::Yes);
    CHECK(uni2.compact() == Tri::Yes);

    auto half = ConstraintSet::box(vec2(0.0, 0.0),
                                   vec2(std::numeric_limits<double>::infinity(), 1.0));
    CHECK(half.compact() == Tri::No);
    CHECK(half.bounding_box() == std::nullopt);
    CHECK(half.project(vec2(5.0, 5.0)) == vec2(5.0, 1.0));
}

TEST_CASE("product sets project per part") {
    auto prod = ConstraintSet::product(
        {ConstraintSet::interval_union({Interval{-1.0, 0.0}, Interval{1.0, 2.0}}),
         ConstraintSet::box1d(0.0, 3.0)});
    REQUIRE(prod.dimension() == 2);
    Vector p = prod.project(vec2(0.4, -1.0));
    CHECK(p[0] == Approx(0.0));
    CHECK(p[1] == Approx(0.0));
    CHECK(prod.bounded());
    auto form = prod.to_functional();
    CHECK(form.inequalities.size() == 3);
    CHECK(prod.contains(vec2(1.5, 2.0)));
    CHECK_FALSE(prod.contains(vec2(0.5, 2.0)));
}

TEST_CASE("functional sets refuse projection") {
    auto fun = ConstraintSet::functional(
        1, {}, {SmoothConstraint{[](const Vector& x) { return x[0] * x[0] - 1.0; },
                                 [](const Vector& x) { return Vector(2.0 * x); }, "unit"}});
    CHECK_THROWS_AS(fun.project(Vector::Zero(1)), std::invalid_argument);
    CHECK(fun.contains(Vector::Zero(1)));
    CHECK_FALSE(fun.contains(Vector::Constant(1, 2.0)));
}
