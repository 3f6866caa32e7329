#include "kronlyap/reduction.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace kronlyap;
using namespace kronlyap::reduction;

TEST(BuildReduction, SecondDegreeInTwoVariables) {
    auto m = build_reduction(2, 2);
    Matrix w(4, 3);
    w << 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1;
    EXPECT_EQ(m.w, w);
    Matrix wplus(3, 4);
    wplus << 1, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 0, 0, 1;
    EXPECT_EQ(m.w_plus, wplus);
    // pseudo-inverse from its definition
    Matrix direct = (w.transpose() * w).inverse() * w.transpose();
    EXPECT_LT((m.w_plus - direct).norm(), 1e-15);
}

TEST(BuildReduction, FirstDegreeIsIdentity) {
    for (std::size_t n : {1u, 2u, 4u}) {
        auto m = build_reduction(n, 1);
        EXPECT_EQ(m.w, Matrix(Matrix::Identity(n, n)));
        EXPECT_EQ(m.w_plus, Matrix(Matrix::Identity(n, n)));
    }
}

TEST(BuildReduction, ColumnCounts) {
    EXPECT_EQ(build_reduction(2, 3).size(), 4u);
    for (std::size_t n = 1; n <= 4; ++n)
        for (int k = 1; k <= 5; ++k)
            EXPECT_EQ(build_reduction(n, k).size(), static_cast<std::size_t>(oracle::binomial(n + k - 1, k)));
    EXPECT_THROW((void)build_reduction(0, 2), std::invalid_argument);
    EXPECT_THROW((void)build_reduction(2, 0), std::invalid_argument);
}

TEST(BuildReduction, MatchesEnumeratedMultisets) {
    for (int n = 1; n <= 3; ++n)
        for (int k = 1; k <= 4; ++k) EXPECT_EQ(build_reduction(n, k).w, oracle::reduction_matrix(n, k)) << n << "," << k;
}

TEST(BuildReduction, StructuralInvariants) {
    for (std::size_t n : {2u, 3u}) {
        for (int k = 1; k <= 4; ++k) {
            auto m = build_reduction(n, k);
            for (Eigen::Index r = 0; r < m.w.rows(); ++r) {
                EXPECT_EQ(m.w.row(r).sum(), 1.0);
                EXPECT_EQ(m.w.row(r).cwiseAbs().maxCoeff(), 1.0);
            }
            const auto mm = static_cast<Eigen::Index>(m.size());
            EXPECT_LT((m.w_plus * m.w - Matrix::Identity(mm, mm)).norm(), 1e-12);
            Matrix wtw = m.w.transpose() * m.w;
            for (Eigen::Index c = 0; c < mm; ++c) EXPECT_EQ(wtw(c, c), m.multiplicity[static_cast<std::size_t>(c)]);
            EXPECT_TRUE((wtw - Matrix(wtw.diagonal().asDiagonal())).isZero(0.0));
        }
    }
}

TEST(Monomials, LiftConsistency) {
    std::mt19937_64 rng(31);
    for (std::size_t n : {2u, 3u}) {
        for (int k = 1; k <= 4; ++k) {
            auto m = build_reduction(n, k);
            Vector x = oracle::random_matrix(rng, static_cast<Eigen::Index>(n), 1);
            Vector xi = oracle::kron_power(x, k);
            Vector eta = monomials(x, m);
            EXPECT_LT((m.w_plus * xi - eta).norm(), 1e-12 * std::max(1.0, eta.norm()));
            EXPECT_LT((m.w * eta - xi).norm(), 1e-12 * std::max(1.0, xi.norm()));
            // positions sharing a monomial carry equal values
            for (Eigen::Index r = 0; r < xi.size(); ++r) {
                const auto col = m.position_monomial[static_cast<std::size_t>(r)];
                EXPECT_NEAR(xi(r), eta(static_cast<Eigen::Index>(col)), 1e-12 * std::max(1.0, std::abs(xi(r))));
            }
        }
    }
    EXPECT_THROW((void)monomials(Vector::Ones(3), build_reduction(2, 2)), std::invalid_argument);
}

TEST(ReduceGenerator, FirstDegreeUnchanged) {
    std::mt19937_64 rng(2);
    Matrix a = oracle::random_matrix(rng, 3, 3);
    EXPECT_LT((reduce_generator(a, build_reduction(3, 1)) - a).norm(), 1e-15);
}

TEST(ReduceGenerator, DiagonalSpectrum) {
    Matrix d = Vector(Eigen::Vector2d(-1, -2)).asDiagonal();
    Matrix r = reduce_generator(lift::lift_generator(d, 2), build_reduction(2, 2));
    Eigen::VectorXd ev = r.eigenvalues().real();
    std::sort(ev.data(), ev.data() + ev.size());
    // full spectrum {-2, -3, -3, -4}; the duplicate -3 belongs to x1 x2 only once
    EXPECT_NEAR(ev(0), -4, 1e-12);
    EXPECT_NEAR(ev(1), -3, 1e-12);
    EXPECT_NEAR(ev(2), -2, 1e-12);
    EXPECT_THROW((void)reduce_generator(Matrix::Identity(3, 3), build_reduction(2, 2)), std::invalid_argument);
}

TEST(ReduceGenerator, SpectrumIsSubMultiset) {
    std::mt19937_64 rng(41);
    for (int k = 2; k <= 4; ++k) {
        Matrix a = oracle::random_matrix(rng, 2, 2);
        Eigen::VectorXcd full = lift::lift_generator(a, k).eigenvalues();
        Eigen::VectorXcd red = reduce_generator(lift::lift_generator(a, k), build_reduction(2, k)).eigenvalues();
        for (Eigen::Index j = 0; j < red.size(); ++j) {
            double best = 1e300;
            for (Eigen::Index f = 0; f < full.size(); ++f) best = std::min(best, std::abs(full(f) - red(j)));
            EXPECT_LT(best, 1e-7);
        }
    }
}

TEST(ReduceGenerator, DirectConstructionAgrees) {
    std::mt19937_64 rng(43);
    for (std::size_t n : {2u, 3u}) {
        Matrix a = oracle::random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (int k = 1; k <= 4; ++k) {
            auto m = build_reduction(n, k);
            Matrix via_full = reduce_generator(lift::lift_generator(a, k), m);
            EXPECT_LT((reduced_generator_direct(a, m) - via_full).norm(), 1e-12 * std::max(1.0, via_full.norm()));
        }
    }
}

TEST(ReduceGenerator, ExactOnMonomialManifold) {
    // d/dt eta = W^+ A^k W eta holds because A^k maps Kronecker powers into range(W)
    std::mt19937_64 rng(47);
    Matrix a = oracle::random_matrix(rng, 2, 2);
    Vector x = oracle::random_matrix(rng, 2, 1);
    for (int k = 1; k <= 4; ++k) {
        auto m = build_reduction(2, k);
        Vector xi = oracle::kron_power(x, k);
        Vector full_rate = lift::lift_generator(a, k) * xi;
        Vector reduced_rate = reduce_generator(lift::lift_generator(a, k), m) * monomials(x, m);
        EXPECT_LT((m.w * reduced_rate - full_rate).norm(), 1e-12 * std::max(1.0, full_rate.norm()));
    }
}

TEST(ReduceTilde, Dimensions) {
    Matrix a(2, 2);
    a << -0.5, 0.5, -0.5, -0.5;
    SwitchedLinearSystem sys({a});
    for (int i = 1; i <= 12; ++i) EXPECT_EQ(reduce_tilde(sys, i).dimension(), i * (i + 3) / 2);
    EXPECT_EQ(reduce_tilde(sys, 12).dimension(), 90);
    auto r1 = reduce_tilde(sys, 1);
    EXPECT_EQ(r1.w_tilde, Matrix(Matrix::Identity(2, 2)));
    EXPECT_EQ(r1.generators[0], a);
    EXPECT_THROW((void)reduce_tilde(sys, 0), std::invalid_argument);
}

TEST(ReduceTilde, ExpandReduceRoundTrip) {
    std::mt19937_64 rng(53);
    Matrix a1 = oracle::random_matrix(rng, 3, 3), a2 = oracle::random_matrix(rng, 3, 3);
    SwitchedLinearSystem sys({a1, a2});
    auto r = reduce_tilde(sys, 3);
    EXPECT_EQ(r.generators.size(), 2u);
    for (int trial = 0; trial < 5; ++trial) {
        Vector x = oracle::random_matrix(rng, 3, 1);
        Vector xi = lift::lift_state(x, 3).vector;
        Vector eta = r.reduce(xi);
        EXPECT_LT((r.expand(eta) - xi).norm(), 1e-12 * xi.norm());
        EXPECT_LT((r.reduce_state(x) - eta).norm(), 1e-12 * eta.norm());
    }
}

TEST(ReduceTilde, QuadraticFormTransfer) {
    // a reduced-space P gives the same polynomial as W~^+T P W~^+ on lifted states
    std::mt19937_64 rng(59);
    Matrix a(2, 2);
    a << 0, 1, -2, -1;
    auto r = reduce_tilde(SwitchedLinearSystem({a}), 4);
    Matrix b = oracle::random_matrix(rng, r.dimension(), r.dimension());
    Matrix p = b * b.transpose();
    Matrix full = r.w_tilde_plus.transpose() * p * r.w_tilde_plus;
    for (int trial = 0; trial < 10; ++trial) {
        Vector x = oracle::random_matrix(rng, 2, 1);
        Vector eta = r.reduce_state(x);
        Vector xi = lift::lift_state(x, 4).vector;
        const double v = eta.dot(p * eta);
        EXPECT_NEAR(xi.dot(full * xi), v, 1e-10 * std::max(1.0, std::abs(v)));
    }
}
