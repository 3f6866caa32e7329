#include "kronlyap/lift.hpp"
#include "kronlyap/reduction.hpp"
#include "kronlyap/sdp.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace kronlyap;
using namespace kronlyap::sdp;

namespace {

std::vector<Matrix> ex1_modes() {
    Matrix a1(2, 2), a2(2, 2);
    a1 << -0.5, 0.5, -0.5, -0.5;
    a2 << -2.5, 2.5, -2.5, 1.5;
    return {a1, a2};
}

double min_eig(const Matrix& m) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
}

// minimize xi0' P xi0 subject to the stability LMIs and P >= W~' W~, in
// reduced coordinates at level 2
SdpProblem reach_problem(double alpha = 1.0) {
    auto red = reduction::reduce_tilde(SwitchedLinearSystem(ex1_modes()), 2);
    std::vector<Matrix> gens;
    for (const auto& g : red.generators) gens.push_back(alpha * g);
    const Matrix gram = red.w_tilde.transpose() * red.w_tilde;
    auto lmis = build_stability_lmis(gens, default_margin(gens), 1.0, gram);
    const Vector xi0 = red.reduce_state(Vector(Eigen::Vector2d(1, 0)));
    lmis.problem.add_objective(lmis.p, xi0 * xi0.transpose());
    return lmis.problem;
}

} // namespace

TEST(StabilityLmis, QuadraticallyStablePairIsFeasible) {
    auto lmis = build_stability_lmis(ex1_modes(), 1e-6);
    auto sol = solve(lmis.problem);
    ASSERT_TRUE(sol.usable()) << sol.diagnostics.message;
    const Matrix p = sol.value(lmis.p);
    for (const auto& a : ex1_modes()) EXPECT_LE(-min_eig(-(p * a + a.transpose() * p)), -1e-6 + 1e-7);
    EXPECT_GE(min_eig(p), 1.0 - 1e-7);
}

TEST(StabilityLmis, UnstableScalarIsInfeasible) {
    auto lmis = build_stability_lmis({Matrix::Constant(1, 1, 1.0)}, 1e-6);
    EXPECT_EQ(solve(lmis.problem).status, Status::infeasible);
}

TEST(StabilityLmis, IdentityIsFeasiblePointForNegativeIdentity) {
    auto lmis = build_stability_lmis({Matrix(-Matrix::Identity(2, 2))}, 1e-6);
    auto check = verify(lmis.problem, {Matrix::Identity(2, 2)});
    EXPECT_TRUE(check.passes(0.0));
    // decay block is -2I + eps I: its PSD-oriented minimum eigenvalue is 2 - eps
    bool found = false;
    for (const auto& b : check.blocks) {
        if (b.name.find("decay") != std::string::npos || b.name.find("mode") != std::string::npos) {
            EXPECT_NEAR(b.min_eigenvalue, 2.0 - 1e-6, 1e-12);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(StabilityLmis, DimensionMismatchThrows) {
    EXPECT_THROW((void)build_stability_lmis({Matrix::Identity(2, 2), Matrix::Identity(3, 3)}, 0.0),
                 std::invalid_argument);
    EXPECT_THROW((void)build_stability_lmis({Matrix::Identity(2, 2)}, 0.0, 1.0, Matrix(Matrix::Identity(3, 3))),
                 std::invalid_argument);
}

TEST(StabilityLmis, StatusInvariantUnderScaling) {
    std::vector<Matrix> unstable = {Matrix::Constant(1, 1, 0.3)};
    for (double alpha : {1e-3, 1.0, 1e3}) {
        std::vector<Matrix> gs;
        for (const auto& a : ex1_modes()) gs.push_back(alpha * a);
        EXPECT_TRUE(solve(build_stability_lmis(gs, default_margin(gs)).problem).usable()) << alpha;
        std::vector<Matrix> us = {alpha * unstable[0]};
        EXPECT_EQ(solve(build_stability_lmis(us, default_margin(us)).problem).status, Status::infeasible) << alpha;
    }
}

TEST(DefaultMargin, ScalesWithLargestNorm) {
    Matrix a = Matrix::Identity(2, 2);
    Matrix b = 3.0 * Matrix::Identity(2, 2);
    EXPECT_NEAR(default_margin({a, b}), 3e-6, 1e-18);
}

TEST(Solve, BoxFeasibility) {
    SdpProblem prob;
    auto p = prob.add_symmetric("P", 3);
    auto lower = prob.add_block("lower", 3, Sense::nsd, Matrix::Identity(3, 3)); // -P + I <= 0
    prob.add_embedded(lower, p, 0, -1.0);
    auto upper = prob.add_block("upper", 3, Sense::psd, 2.0 * Matrix::Identity(3, 3)); // 2I - P >= 0
    prob.add_embedded(upper, p, 0, -1.0);
    auto sol = solve(prob);
    ASSERT_TRUE(sol.usable());
    const Matrix v = sol.value(p);
    EXPECT_GE(min_eig(v - Matrix::Identity(3, 3)), -1e-7);
    EXPECT_GE(min_eig(2.0 * Matrix::Identity(3, 3) - v), -1e-7);
}

TEST(Solve, ContradictoryBoundsAreInfeasible) {
    SdpProblem prob;
    auto p = prob.add_symmetric("P", 2);
    auto a = prob.add_block("below", 2, Sense::nsd, Matrix::Identity(2, 2)); // P + I <= 0
    prob.add_embedded(a, p, 0);
    auto b = prob.add_block("above", 2, Sense::psd, -Matrix::Identity(2, 2)); // P - I >= 0
    prob.add_embedded(b, p, 0);
    auto sol = solve(prob);
    EXPECT_EQ(sol.status, Status::infeasible);
    EXPECT_FALSE(sol.usable());
}

TEST(Solve, SchurComplementEpigraph) {
    // minimize t subject to [[t, c], [c', Q]] >= 0 with Q fixed: t* = c Q^-1 c'
    Matrix q(2, 2);
    q << 2, 0.5, 0.5, 1;
    RowVector c(2);
    c << 1, -1;
    SdpProblem prob;
    auto t = prob.add_scalar("t");
    Matrix k = Matrix::Zero(3, 3);
    k.topRightCorner(1, 2) = c;
    k.bottomLeftCorner(2, 1) = c.transpose();
    k.bottomRightCorner(2, 2) = q;
    auto blk = prob.add_block("epigraph", 3, Sense::psd, k);
    prob.add_embedded(blk, t, 0);
    prob.add_objective(t, Matrix::Ones(1, 1));
    auto sol = solve(prob);
    ASSERT_EQ(sol.status, Status::optimal) << sol.diagnostics.message;
    const double expected = c.dot(q.ldlt().solve(c.transpose()));
    EXPECT_NEAR(sol.value(t)(0, 0), expected, 1e-6);
    EXPECT_NEAR(sol.objective, expected, 1e-6);
}

TEST(Solve, EqualityConstrainedTrace) {
    // minimize <C, P> subject to tr(P) = 1, P >= 0: the smallest eigenvalue of C
    Matrix cm(3, 3);
    cm << 2, 1, 0, 1, 3, 1, 0, 1, 4;
    SdpProblem prob;
    auto p = prob.add_symmetric("P", 3);
    auto blk = prob.add_block("psd", 3, Sense::psd);
    prob.add_embedded(blk, p, 0);
    LinearForm tr;
    tr.parts.emplace_back(p.index, Matrix::Identity(3, 3));
    prob.add_equality("trace", tr, 1.0);
    prob.add_objective(p, cm);
    auto sol = solve(prob);
    ASSERT_EQ(sol.status, Status::optimal) << sol.diagnostics.message;
    EXPECT_NEAR(sol.objective, min_eig(cm), 1e-6);
    EXPECT_NEAR(sol.value(p).trace(), 1.0, 1e-7);
}

TEST(Solve, ReachObjectiveIndependentOfStartingPoint) {
    const SdpProblem prob = reach_problem();
    SolverSettings a;
    SolverSettings b;
    b.start_scale = 7.3;
    auto sa = solve(prob, a);
    auto sb = solve(prob, b);
    ASSERT_EQ(sa.status, Status::optimal) << sa.diagnostics.message;
    ASSERT_EQ(sb.status, Status::optimal) << sb.diagnostics.message;
    EXPECT_NEAR(sa.objective, sb.objective, 1e-6 * std::abs(sa.objective));
}

TEST(Solve, Deterministic) {
    const SdpProblem prob = reach_problem();
    auto s1 = solve(prob);
    auto s2 = solve(prob);
    ASSERT_EQ(s1.values.size(), s2.values.size());
    EXPECT_EQ(s1.status, s2.status);
    EXPECT_EQ(s1.diagnostics.iterations, s2.diagnostics.iterations);
    for (std::size_t k = 0; k < s1.values.size(); ++k) EXPECT_TRUE(s1.values[k] == s2.values[k]);
}

TEST(Solve, ReturnedSolutionsPassIndependentVerifier) {
    SolverSettings settings;
    for (double alpha : {0.5, 1.0, 4.0}) {
        const SdpProblem prob = reach_problem(alpha);
        auto sol = solve(prob, settings);
        ASSERT_TRUE(sol.usable());
        auto v = verify(prob, sol.values);
        EXPECT_LE(v.max_violation, 10 * settings.feas_tol);
        EXPECT_LE(v.max_equality_residual, 10 * settings.feas_tol);
        EXPECT_DOUBLE_EQ(v.max_violation, sol.diagnostics.max_violation);
    }
}

TEST(Solve, FailuresAreReportedNotThrown) {
    SdpProblem empty;
    (void)empty.add_symmetric("P", 2);
    auto s = solve(empty);
    EXPECT_EQ(s.status, Status::failed);
    EXPECT_FALSE(s.diagnostics.message.empty());

    SolverSettings bad;
    bad.start_scale = -1.0;
    auto s2 = solve(reach_problem(), bad);
    EXPECT_EQ(s2.status, Status::failed);

    SolverSettings starved;
    starved.max_iterations = 2;
    auto s3 = solve(reach_problem(), starved);
    EXPECT_FALSE(s3.usable());
    EXPECT_FALSE(s3.diagnostics.message.empty());
}

TEST(Problem, PackUnpackRoundTrip) {
    SdpProblem prob;
    auto p = prob.add_symmetric("P", 3);
    auto g = prob.add_matrix("G", 2, 3);
    Matrix pv(3, 3);
    pv << 1, 2, 3, 2, 4, 5, 3, 5, 6;
    Matrix gv(2, 3);
    gv << 1, 2, 3, 4, 5, 6;
    EXPECT_EQ(prob.coordinate_count(), 6u + 6u);
    Vector y = prob.pack({pv, gv});
    EXPECT_EQ(prob.unpack(y, p.index), pv);
    EXPECT_EQ(prob.unpack(y, g.index), gv);
}

TEST(Problem, RejectsUndeclaredVariablesAndBadShapes) {
    SdpProblem prob;
    auto p = prob.add_symmetric("P", 2);
    auto blk = prob.add_block("b", 2, Sense::psd);
    EXPECT_THROW(prob.add_term(blk, VariableId{5}, Matrix::Identity(2, 2), Matrix::Identity(2, 2)), std::exception);
    EXPECT_THROW(prob.add_term(blk, p, Matrix::Identity(3, 2), Matrix::Identity(2, 2)), std::invalid_argument);
    EXPECT_THROW(prob.add_term(BlockId{3}, p, Matrix::Identity(2, 2), Matrix::Identity(2, 2)), std::exception);
}

TEST(StatusNames, RoundTrip) {
    for (Status s : {Status::optimal, Status::feasible, Status::infeasible, Status::inaccurate, Status::failed})
        EXPECT_EQ(status_from_string(to_string(s)), s);
    EXPECT_THROW((void)status_from_string("great"), std::invalid_argument);
}

TEST(Settings, ToleranceOverride) {
    SolverSettings s;
    s.set_tolerance(1e-5);
    EXPECT_EQ(s.feas_tol, 1e-5);
    EXPECT_EQ(s.gap_tol, 1e-5);
    EXPECT_GE(s.acceptable_tol, 1e-4);
    EXPECT_THROW(s.set_tolerance(0.0), std::invalid_argument);
}
