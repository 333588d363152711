#include <catch2/catch_amalgamated.hpp>

#include "adlm/objective.hpp"
#include "adlm/rng.hpp"
#include "support/finite_difference.hpp"

using namespace adlm;
using Catch::Approx;

namespace {

Vector vec1(double v) { return Vector::Constant(1, v); }

ObjectiveBlock make_block(BlockKind kind, RandomStream& rng) {
    switch (kind) {
        case BlockKind::Zero:
            return ObjectiveBlock::zero(3);
        case BlockKind::Quadratic: {
            Matrix Q(3, 3);
            for (Index i = 0; i < 3; ++i)
                for (Index j = 0; j < 3; ++j) Q(i, j) = rng.uniform(-1.0, 1.0);
            Vector q(3);
            for (Index i = 0; i < 3; ++i) q[i] = rng.uniform(-1.0, 1.0);
            return ObjectiveBlock::quadratic(Q, q);
        }
        case BlockKind::Polynomial1d:
            return ObjectiveBlock::polynomial1d({rng.uniform(-1, 1), rng.uniform(-1, 1),
                                                 rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)});
        case BlockKind::Cosine1d:
            return ObjectiveBlock::cosine1d(rng.uniform(0.5, 2.0), rng.uniform(-3.0, 3.0));
        case BlockKind::NegativeSquare1d:
            return ObjectiveBlock::negative_square_1d();
        case BlockKind::Huber:
            return ObjectiveBlock::huber(4, rng.uniform(0.5, 2.0));
        case BlockKind::RangeResidual: {
            std::vector<RangeTerm> terms;
            terms.push_back(RangeTerm{0, 1, {}, rng.uniform(0.1, 2.0)});
            terms.push_back(RangeTerm{1, -1, Eigen::Vector2d(0.3, -0.4), rng.uniform(0.1, 2.0)});
            return ObjectiveBlock::range_residual(4, std::move(terms));
        }
        case BlockKind::Sum: {
            std::vector<ObjectiveBlock> parts;
            parts.push_back(ObjectiveBlock::cosine1d(1.0, 0.0));
            parts.push_back(ObjectiveBlock::huber(2, 1.0));
            return ObjectiveBlock::sum(std::move(parts), {{1}, {0, 2}});
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("block values match hand computations") {
    auto square = ObjectiveBlock::polynomial1d({0.0, 0.0, 1.0});
    CHECK(square.value(vec1(1.0)) == Approx(1.0));
    CHECK(square.value(vec1(2.0)) == Approx(4.0));

    auto cos_block = ObjectiveBlock::cosine1d(1.0, 0.0);
    auto sin_block = sine1d();
    CHECK(cos_block.value(vec1(0.0)) == Approx(1.0));
    CHECK(sin_block.value(vec1(0.0)) == Approx(0.0).margin(1e-15));
    CHECK(sin_block.value(vec1(M_PI / 2)) == Approx(1.0));
    CHECK(sin_block.derivative(0.0) == Approx(1.0));

    auto negsq = ObjectiveBlock::negative_square_1d();
    CHECK(negsq.value(vec1(3.0)) == Approx(-9.0));
    CHECK(negsq.derivative(3.0) == Approx(-6.0));

    auto hub = ObjectiveBlock::huber(2, 1.0);
    Vector u(2);
    u << 0.5, 3.0;
    CHECK(hub.value(u) == Approx(0.5 * 0.25 + (3.0 - 0.5)));
    CHECK(hub.gradient(u)[0] == Approx(0.5));
    CHECK(hub.gradient(u)[1] == Approx(1.0));
}

TEST_CASE("quadratic blocks are symmetrized at construction") {
    Matrix Q(2, 2);
    Q << 1.0, 4.0, 0.0, 2.0;
    auto block = ObjectiveBlock::quadratic(Q, Vector::Zero(2));
    Vector x(2);
    x << 1.0, 1.0;
    // x'[(Q+Q')/2]x = 1 + 2 + 2 + 2
    CHECK(block.value(x) == Approx(7.0));
    Vector g = block.gradient(x);
    CHECK(g[0] == Approx(2.0 * 1.0 + 2.0 * 2.0));
    CHECK(g[1] == Approx(2.0 * 2.0 + 2.0 * 2.0));
}

TEST_CASE("range residual matches the quartic form") {
    std::vector<RangeTerm> terms{RangeTerm{0, 1, {}, 1.0}};
    auto block = ObjectiveBlock::range_residual(4, terms);
    Vector x(4);
    x << 0.0, 0.0, 1.0, 0.0;  // distance^2 = 1, residual 0
    CHECK(block.value(x) == Approx(0.0).margin(1e-15));
    x << 0.0, 0.0, 2.0, 0.0;  // residual (1 - 4) = -3
    CHECK(block.value(x) == Approx(9.0));
}

TEST_CASE("sum blocks scatter through their index maps") {
    std::vector<ObjectiveBlock> parts;
    parts.push_back(ObjectiveBlock::polynomial1d({0.0, 0.0, 1.0}));  // v^2 on slot 2
    parts.push_back(ObjectiveBlock::polynomial1d({0.0, 1.0}));       // v on slot 0
    auto sum = ObjectiveBlock::sum(std::move(parts), {{2}, {0}});
    REQUIRE(sum.dimension() == 3);
    Vector x(3);
    x << 5.0, 7.0, 3.0;
    CHECK(sum.value(x) == Approx(9.0 + 5.0));
    Vector g = sum.gradient(x);
    CHECK(g[0] == Approx(1.0));
    CHECK(g[1] == Approx(0.0));
    CHECK(g[2] == Approx(6.0));
}

TEST_CASE("analytic gradients agree with central differences") {
    const BlockKind kinds[] = {BlockKind::Zero,     BlockKind::Quadratic,
                               BlockKind::Polynomial1d, BlockKind::Cosine1d,
                               BlockKind::NegativeSquare1d, BlockKind::Huber,
                               BlockKind::RangeResidual,    BlockKind::Sum};
    RandomStream rng(20240518, 0);
    for (BlockKind kind : kinds) {
        ObjectiveBlock block = make_block(kind, rng);
        for (int trial = 0; trial < 25; ++trial) {
            Vector x(block.dimension());
            for (Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-3.0, 3.0);
            INFO("kind " << to_string(kind) << " trial " << trial);
            CHECK(testing::fd_relative_error(block, x) <= 1e-6);
        }
    }
}

TEST_CASE("derivative registry constants") {
    CHECK(ObjectiveBlock::cosine1d(1.0, 0.0).gradient_lipschitz().value() == Approx(1.0));
    CHECK(sine1d().gradient_lipschitz().value() == Approx(1.0));
    CHECK(ObjectiveBlock::negative_square_1d().gradient_lipschitz().value() == Approx(2.0));
    CHECK(ObjectiveBlock::quadratic(Matrix::Constant(1, 1, -1.5), Vector::Zero(1))
              .gradient_lipschitz()
              .value() == Approx(3.0));
    CHECK(ObjectiveBlock::huber(3, 0.7).gradient_lipschitz().value() == Approx(1.0));
    CHECK_FALSE(ObjectiveBlock::polynomial1d({0, 0, 0, 1}).gradient_lipschitz().has_value());

    CHECK(ObjectiveBlock::huber(4, 0.5).gradient_bound().value() == Approx(0.5 * 2.0));
    CHECK(ObjectiveBlock::cosine1d(2.0, 0.3).gradient_bound().value() == Approx(2.0));
}

TEST_CASE("convexity classification") {
    CHECK(ObjectiveBlock::zero(2).is_convex() == Tri::Yes);
    CHECK(ObjectiveBlock::huber(2, 1.0).is_convex() == Tri::Yes);
    CHECK(ObjectiveBlock::negative_square_1d().is_convex() == Tri::No);
    CHECK(ObjectiveBlock::cosine1d(1.0, 0.0).is_convex() == Tri::No);
    CHECK(ObjectiveBlock::polynomial1d({0, 0, 1}).is_convex() == Tri::Yes);
    CHECK(ObjectiveBlock::polynomial1d({0, 0, -1}).is_convex() == Tri::No);
}

TEST_CASE("objective usage errors") {
    auto block = ObjectiveBlock::zero(2);
    CHECK_THROWS_AS(block.value(Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(block.derivative(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveBlock::huber(2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveBlock::quadratic(Matrix::Zero(2, 3), Vector::Zero(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveBlock::range_residual(3, {}), std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveBlock::sum({ObjectiveBlock::zero(2)}, {{0}}), std::invalid_argument);
}
