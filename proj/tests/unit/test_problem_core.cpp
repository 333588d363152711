#include <catch2/catch_amalgamated.hpp>

#include "adlm/problem.hpp"
#include "adlm/rng.hpp"
#include "support/finite_difference.hpp"
#include "support/instances.hpp"

using namespace adlm;
using Catch::Approx;

TEST_CASE("objective evaluation") {
    auto square = ObjectiveBlock::polynomial1d({0.0, 0.0, 1.0});
    StructuredProblem squares(square, square, Matrix::Identity(1, 1), -Matrix::Identity(1, 1),
                              Vector::Zero(1), ConstraintSet::whole_space(1),
                              ConstraintSet::whole_space(1));
    CHECK(eval_objective(squares, Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)) ==
          Approx(5.0));

    StructuredProblem trig = testing::cos_sin_consensus();
    CHECK(eval_objective(trig, Vector::Zero(1), Vector::Zero(1)) == Approx(1.0));

    StructuredProblem ex4 = testing::interval_union_instance();
    CHECK(eval_objective(ex4, Vector::Zero(1), Vector::Zero(1)) == Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(eval_objective(trig, Vector::Zero(2), Vector::Zero(1)), std::invalid_argument);
}

TEST_CASE("augmented Lagrangian evaluation") {
    StructuredProblem p = testing::quadratic_consensus();

    // feasible point: dual and penalty terms vanish for any y, rho
    PrimalDualPoint feasible{Vector::Constant(1, 1.3), Vector::Constant(1, 1.3),
                             Vector::Constant(1, -4.0), 7.0};
    CHECK(eval_aug_lagrangian(p, feasible) ==
          Approx(eval_objective(p, feasible.x, feasible.z)));

    PrimalDualPoint origin{Vector::Zero(1), Vector::Zero(1), Vector::Zero(1), 2.0};
    CHECK(eval_aug_lagrangian(p, origin) == Approx(5.0));

    PrimalDualPoint shifted{Vector::Constant(1, 1.0), Vector::Zero(1), Vector::Constant(1, 1.0),
                            2.0};
    CHECK(eval_aug_lagrangian(p, shifted) == Approx(6.0));

    PrimalDualPoint bad = origin;
    bad.rho = 0.0;
    CHECK_THROWS_AS(eval_aug_lagrangian(p, bad), std::invalid_argument);
}

TEST_CASE("primal residual") {
    StructuredProblem p = testing::quadratic_consensus();
    CHECK(eval_primal_residual(p, Vector::Constant(1, 0.7), Vector::Constant(1, 0.7)) ==
          Approx(0.0).margin(1e-15));

    StructuredProblem ex4 = testing::interval_union_instance();
    CHECK(eval_primal_residual(ex4, Vector::Zero(1), Vector::Zero(1)) == Approx(0.1));

    auto sq2 = ObjectiveBlock::quadratic(Matrix::Identity(2, 2), Vector::Zero(2));
    StructuredProblem consensus2(sq2, sq2, Matrix::Identity(2, 2), -Matrix::Identity(2, 2),
                                 Vector::Zero(2), ConstraintSet::whole_space(2),
                                 ConstraintSet::whole_space(2));
    CHECK(eval_primal_residual(consensus2, Vector::Ones(2), Vector::Zero(2)) ==
          Approx(std::sqrt(2.0)));
}

TEST_CASE("primal residual is symmetric under block exchange") {
    RandomStream rng(11, 0);
    Matrix A(3, 2), B(3, 2);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 2; ++j) {
            A(i, j) = rng.uniform(-1, 1);
            B(i, j) = rng.uniform(-1, 1);
        }
    Vector c(3);
    for (Index i = 0; i < 3; ++i) c[i] = rng.uniform(-1, 1);
    auto blk = ObjectiveBlock::zero(2);
    StructuredProblem fwd(blk, blk, A, B, c, ConstraintSet::whole_space(2),
                          ConstraintSet::whole_space(2));
    StructuredProblem swp(blk, blk, B, A, c, ConstraintSet::whole_space(2),
                          ConstraintSet::whole_space(2));
    for (int trial = 0; trial < 50; ++trial) {
        Vector u(2), v(2);
        for (Index i = 0; i < 2; ++i) {
            u[i] = rng.uniform(-2, 2);
            v[i] = rng.uniform(-2, 2);
        }
        CHECK(eval_primal_residual(fwd, u, v) == Approx(eval_primal_residual(swp, v, u)));
    }
}

TEST_CASE("block gradients of the augmented Lagrangian") {
    StructuredProblem p = testing::quadratic_consensus();

    PrimalDualPoint origin{Vector::Zero(1), Vector::Zero(1), Vector::Zero(1), 2.0};
    CHECK(grad_aug_lagrangian(p, origin, VariableBlock::X)[0] == Approx(-2.0));

    // vanishes at the block minimizer: at z=0, y=0, rho=2 the x-block
    // objective is (x-1)^2 + x^2, stationary at x = 0.5
    PrimalDualPoint at_min{Vector::Constant(1, 0.5), Vector::Zero(1), Vector::Zero(1), 2.0};
    CHECK(grad_aug_lagrangian(p, at_min, VariableBlock::X)[0] == Approx(0.0).margin(1e-12));
}

TEST_CASE("gradients match finite differences through the Lagrangian") {
    RandomStream rng(4242, 0);
    StructuredProblem p = testing::indefinite_box_instance();
    for (int trial = 0; trial < 50; ++trial) {
        PrimalDualPoint pt;
        pt.x = Vector(2);
        pt.z = Vector(2);
        pt.y = Vector(3);
        for (Index i = 0; i < 2; ++i) {
            pt.x[i] = rng.uniform(-2, 2);
            pt.z[i] = rng.uniform(-2, 2);
        }
        for (Index i = 0; i < 3; ++i) pt.y[i] = rng.uniform(-2, 2);
        pt.rho = rng.uniform(0.5, 5.0);

        const double h = 1e-6 * (1.0 + pt.x.norm());
        Vector gx = grad_aug_lagrangian(p, pt, VariableBlock::X);
        for (Index i = 0; i < 2; ++i) {
            PrimalDualPoint hi = pt, lo = pt;
            hi.x[i] += h;
            lo.x[i] -= h;
            double fd = (eval_aug_lagrangian(p, hi) - eval_aug_lagrangian(p, lo)) / (2.0 * h);
            CHECK(gx[i] == Approx(fd).margin(1e-5 * (1.0 + std::abs(gx[i]))));
        }
    }
}
