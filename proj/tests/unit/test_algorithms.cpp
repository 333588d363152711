#include <catch2/catch_amalgamated.hpp>

#include "adlm/algorithms.hpp"
#include "support/instances.hpp"

using namespace adlm;
using Catch::Approx;

namespace {
const StopRule kTightStop{2000, 1e-10, 1e-10, 1e6};
}

TEST_CASE("penalty schedules") {
    auto lin = PenaltySchedule::linear(1.0, 1.0);
    CHECK(lin.at(0) == Approx(1.0));
    CHECK(lin.at(10) == Approx(11.0));

    auto geo = PenaltySchedule::geometric(2.0, 1.5, 5);
    for (int t = 0; t < 60; ++t) {
        CHECK(geo.at(t + 1) >= geo.at(t));                     // nondecreasing
        CHECK(geo.at(t + 5) >= 1.5 * geo.at(t) - 1e-12);       // rho(t+kappa) >= Delta rho(t)
    }
    CHECK_THROWS_AS(PenaltySchedule::geometric(1.0, 1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(PenaltySchedule::linear(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("admm reaches the quadratic consensus KKT point") {
    StructuredProblem p = testing::quadratic_consensus();
    auto trace = run_admm(p, 2.0, Vector::Zero(1), Vector::Zero(1), SolverPolicy{}, kTightStop);
    REQUIRE(trace.verdict == Verdict::Converged);
    const auto& last = trace.final_record();
    CHECK(last.x[0] == Approx(1.5).margin(1e-8));
    CHECK(last.z[0] == Approx(1.5).margin(1e-8));
    CHECK(last.y[0] == Approx(-1.0).margin(1e-8));
    REQUIRE(trace.fon.has_value());
    CHECK(trace.fon->passed);
    CHECK(trace.fon->tolerance == Approx(1e-6));
}

TEST_CASE("admm dual update identity holds exactly") {
    StructuredProblem p = testing::quadratic_consensus();
    double rho = 2.0;
    auto trace = run_admm(p, rho, Vector::Zero(1), Vector::Zero(1), SolverPolicy{}, kTightStop);
    for (std::size_t t = 0; t + 1 < trace.records.size(); ++t) {
        const auto& cur = trace.records[t];
        const auto& nxt = trace.records[t + 1];
        Vector expected = cur.y + rho * coupling_residual(p, nxt.x, nxt.z);
        CHECK((nxt.y - expected).cwiseAbs().maxCoeff() == 0.0);  // exact to round-off
        CHECK(nxt.dual_step == Approx(rho * nxt.primal_residual).margin(1e-14));
    }
}

TEST_CASE("z-update never increases the augmented Lagrangian") {
    StructuredProblem p = testing::quadratic_consensus();
    auto check_monotone = [&](const IterationTrace& trace) {
        for (std::size_t t = 0; t + 1 < trace.records.size(); ++t) {
            const auto& cur = trace.records[t];
            const auto& nxt = trace.records[t + 1];
            double before = eval_aug_lagrangian(p, PrimalDualPoint{nxt.x, cur.z, cur.y, cur.rho});
            double after = eval_aug_lagrangian(p, PrimalDualPoint{nxt.x, nxt.z, cur.y, cur.rho});
            CHECK(after <= before + 1e-10 * (1.0 + std::abs(before)));
        }
    };
    check_monotone(run_admm(p, 2.0, Vector::Zero(1), Vector::Zero(1), SolverPolicy{}, kTightStop));
    check_monotone(run_adpm(p, PenaltySchedule::linear(1.0, 1.0), DualPolicy::zero(),
                            Vector::Zero(1), Vector::Zero(1), SolverPolicy{},
                            StopRule{200, 1e-9, 1e-9, 1e6}));
}

TEST_CASE("adpm rejects constant schedules and raw recursion") {
    StructuredProblem p = testing::quadratic_consensus();
    CHECK_THROWS_AS(run_adpm(p, PenaltySchedule::constant(2.0), DualPolicy::zero(),
                             Vector::Zero(1), Vector::Zero(1), SolverPolicy{}, kTightStop),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_adpm(p, PenaltySchedule::linear(1.0, 1.0),
                             DualPolicy::multiplier_recursion(), Vector::Zero(1), Vector::Zero(1),
                             SolverPolicy{}, kTightStop),
                    std::invalid_argument);
}

TEST_CASE("adpm on the huber consensus satisfies the residual bound") {
    StructuredProblem p = testing::huber_consensus();
    Vector z0 = Vector::Constant(1, 2.5);
    auto trace = run_adpm(p, PenaltySchedule::linear(1.0, 1.0), DualPolicy::zero(), z0,
                          Vector::Zero(3), SolverPolicy{}, StopRule{2000, 1e-4, 1e-5, 1e6});
    CHECK(trace.verdict == Verdict::Converged);

    // bound r(t+1) <= (M / rho(t)) (1 + ||B (B'B)^-1 B'||) with M the largest
    // observed gradient norm
    double max_grad = 0.0;
    for (std::size_t t = 1; t < trace.records.size(); ++t)
        max_grad = std::max(max_grad, p.f.gradient(trace.records[t].x).norm());
    Matrix projector = p.B * (p.B.transpose() * p.B).ldlt().solve(p.B.transpose());
    Eigen::JacobiSVD<Matrix> svd(projector);
    double factor = 1.0 + svd.singularValues()[0];
    for (std::size_t t = 0; t + 1 < trace.records.size(); ++t) {
        double bound = max_grad / trace.records[t].rho * factor;
        CHECK(trace.records[t + 1].primal_residual <= bound + 1e-12);
    }

    auto diag = diagnose_trace(trace, p, 1e-8);
    CHECK(diag.dual_converged);  // zero dual steps are trivially settled
    REQUIRE(diag.prop1_bound_ratio.has_value());
    CHECK(*diag.prop1_bound_ratio == Approx(1.0));
}

TEST_CASE("adpm with exact scalar solves matches the grid oracle on the nonconvex set") {
    StructuredProblem p = testing::interval_union_instance();
    auto schedule = PenaltySchedule::geometric(1.0, 2.0, 1);
    StopRule stop{200, 1e-9, 1e-10, 1e6};

    SolverPolicy exact;
    exact.strategy = SolveStrategy::ScalarExact;
    auto trace = run_adpm(p, schedule, DualPolicy::zero(), Vector::Zero(1), Vector::Zero(1), exact,
                          stop);
    CHECK(trace.verdict == Verdict::Converged);

    SolverPolicy grid;
    grid.strategy = SolveStrategy::GridGlobal;
    grid.grid_points_per_dim = 2001;
    auto oracle = run_adpm(p, schedule, DualPolicy::zero(), Vector::Zero(1), Vector::Zero(1), grid,
                           stop);
    CHECK(std::abs(trace.final_record().x[0] - oracle.final_record().x[0]) <= 1e-6);
    CHECK(std::abs(trace.final_record().z[0] - oracle.final_record().z[0]) <= 1e-6);

    // the run lands on a feasible point of the nonconvex instance
    CHECK(trace.final_primal_residual() <= 1e-6);
}

TEST_CASE("bounded dual recursion stays inside its ball") {
    StructuredProblem p = testing::huber_consensus();
    auto trace = run_adpm(p, PenaltySchedule::linear(1.0, 1.0), DualPolicy::bounded_recursion(0.5),
                          Vector::Constant(1, 2.0), Vector::Zero(3), SolverPolicy{},
                          StopRule{300, 1e-7, 1e-8, 1e6});
    for (const auto& rec : trace.records) CHECK(rec.y.norm() <= 0.5 + 1e-12);
}

TEST_CASE("quadratic penalty matches the admm limit on a convex instance") {
    StructuredProblem p = testing::quadratic_consensus();
    auto admm = run_admm(p, 2.0, Vector::Zero(1), Vector::Zero(1), SolverPolicy{}, kTightStop);
    auto qpm = run_quadratic_penalty(p, PenaltySchedule::geometric(1.0, 2.0, 1), Vector::Zero(1),
                                     Vector::Zero(1), SolverPolicy{},
                                     StopRule{300, 1e-8, 1e-8, 1e8});
    CHECK(qpm.verdict == Verdict::Converged);
    CHECK(std::abs(qpm.final_record().x[0] - admm.final_record().x[0]) <= 1e-6);
    CHECK(std::abs(qpm.final_record().z[0] - admm.final_record().z[0]) <= 1e-6);
}

TEST_CASE("joint grid solves drive the nonconvex instance to its global optimum") {
    StructuredProblem p = testing::interval_union_instance();
    SolverPolicy policy;
    policy.grid_points_per_dim = 301;
    auto trace = run_quadratic_penalty(p, PenaltySchedule::geometric(1.0, 2.0, 1), Vector::Zero(1),
                                       Vector::Zero(1), policy, StopRule{60, 1e-7, 1e-9, 1e6});

    // constrained oracle: parametrize the feasible segments z = 2x + 0.1 and
    // scan the objective x^2 + z^2
    double best_val = 1e300, best_x = 0.0;
    for (auto piece : {std::pair{-0.05, 0.0}, std::pair{1.0, 1.45}}) {
        for (int k = 0; k <= 200000; ++k) {
            double x = piece.first + (piece.second - piece.first) * k / 200000.0;
            double z = 2.0 * x + 0.1;
            double v = x * x + z * z;
            if (v < best_val) {
                best_val = v;
                best_x = x;
            }
        }
    }
    CHECK(best_x == Approx(-0.04).margin(1e-4));
    CHECK(std::abs(trace.final_record().x[0] - best_x) <= 1e-3);
    CHECK(trace.final_primal_residual() <= 1e-4);
}

TEST_CASE("quadratic penalty on a zero objective reaches feasibility") {
    // any feasible limit is acceptable; the residual must vanish
    Matrix A(2, 2), B(2, 1);
    A << 1.0, 0.2, 0.0, 1.0;
    B << -1.0, -0.5;
    Vector c(2);
    c << 0.3, -0.1;
    StructuredProblem p(ObjectiveBlock::zero(2), ObjectiveBlock::zero(1), A, B, c,
                        ConstraintSet::whole_space(2), ConstraintSet::whole_space(1));
    auto trace = run_quadratic_penalty(p, PenaltySchedule::geometric(1.0, 2.0, 1), Vector::Zero(1),
                                       Vector::Zero(2), SolverPolicy{},
                                       StopRule{200, 1e-10, 1e-10, 1e8});
    CHECK(trace.verdict == Verdict::Converged);
    CHECK(trace.final_primal_residual() <= 1e-10);
    for (std::size_t t = 1; t < trace.records.size(); ++t)
        CHECK(trace.records[t].primal_residual <=
              trace.records[t - 1].primal_residual + 1e-12);
}

TEST_CASE("method of multipliers agrees with admm and respects optimal starts") {
    StructuredProblem p = testing::quadratic_consensus();
    auto mm = run_method_of_multipliers(p, 2.0, Vector::Zero(1), Vector::Zero(1), SolverPolicy{},
                                        kTightStop);
    REQUIRE(mm.verdict == Verdict::Converged);
    CHECK(mm.final_record().x[0] == Approx(1.5).margin(1e-8));
    CHECK(mm.final_record().y[0] == Approx(-1.0).margin(1e-8));
    REQUIRE(mm.fon.has_value());
    CHECK(mm.fon->passed);

    // an already-optimal start does not move (one iteration materializes x,
    // one observes the zero step)
    auto still = run_method_of_multipliers(p, 2.0, Vector::Constant(1, 1.5),
                                           Vector::Constant(1, -1.0), SolverPolicy{}, kTightStop);
    CHECK(still.verdict == Verdict::Converged);
    CHECK(still.iterations() <= 2);
    for (std::size_t t = 1; t < still.records.size(); ++t) {
        CHECK(still.records[t].z[0] == Approx(1.5).margin(1e-12));
        CHECK(still.records[t].y[0] == Approx(-1.0).margin(1e-12));
    }
    CHECK(still.final_record().x[0] == Approx(1.5).margin(1e-12));
}

TEST_CASE("method of multipliers on the trigonometric pair reaches a stationary point") {
    StructuredProblem p = testing::cos_sin_consensus();
    SolverPolicy policy;
    policy.strategy = SolveStrategy::ScalarExact;
    auto mm = run_method_of_multipliers(p, 2.0, Vector::Constant(1, 2.0), Vector::Zero(1), policy,
                                        StopRule{500, 1e-9, 1e-9, 1e6});
    REQUIRE(mm.verdict == Verdict::Converged);
    double z = mm.final_record().z[0];
    CHECK(std::abs(-std::sin(z) + std::cos(z)) <= 1e-6);  // f'(z) + g'(z) = 0
}

TEST_CASE("negative-square admm diverges from a nonzero start") {
    StructuredProblem p(ObjectiveBlock::negative_square_1d(), ObjectiveBlock::negative_square_1d(),
                        Matrix::Identity(1, 1), -Matrix::Identity(1, 1), Vector::Zero(1),
                        ConstraintSet::whole_space(1), ConstraintSet::whole_space(1));
    SolverPolicy policy;
    policy.strategy = SolveStrategy::ScalarExact;
    auto trace = run_admm(p, 3.0, Vector::Constant(1, 0.1), Vector::Constant(1, -0.2), policy,
                          StopRule{500, 1e-9, 1e-9, 1e6});
    CHECK(trace.verdict == Verdict::Diverged);
    CHECK(trace.final_record().z[0] > 0.0);

    auto diag = diagnose_trace(trace, p, 1e-6);
    CHECK_FALSE(diag.dual_converged);
    CHECK_FALSE(diag.fon.has_value());
}

TEST_CASE("traces are reproducible run to run") {
    StructuredProblem p = testing::huber_consensus();
    auto run = [&] {
        return run_adpm(p, PenaltySchedule::linear(1.0, 1.0), DualPolicy::zero(),
                        Vector::Constant(1, 2.5), Vector::Zero(3), SolverPolicy{},
                        StopRule{500, 1e-7, 1e-8, 1e6});
    };
    CHECK(run().csv() == run().csv());
}
