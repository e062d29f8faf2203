#include "oracles.hpp"

#include "spiked/stieltjes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace spiked;

TEST(Ratios, Validation) {
    EXPECT_THROW(RatioVector({1.0}), std::invalid_argument);
    EXPECT_THROW(RatioVector({0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(RatioVector({-0.1, 1.1}), std::invalid_argument);
    EXPECT_NO_THROW(RatioVector({0.25, 0.75}));
    EXPECT_THROW(RatioVector::from_dims({3, 0, 2}), std::invalid_argument);
    const auto r = RatioVector::from_dims({10, 20, 30});
    EXPECT_NEAR(r[0], 1.0 / 6.0, 1e-15);
    EXPECT_TRUE(RatioVector::matrix(0.3).is_matrix_embedding());
    EXPECT_NEAR(RatioVector::matrix(0.3).matrix_ratio(), 0.3, 1e-15);
    EXPECT_TRUE(RatioVector::uniform(4).is_uniform());
    EXPECT_FALSE(RatioVector::matrix(0.3).interior());
}

TEST(FixedPoint, CubicAtThree) {
    const auto s = solve_fixed_point(RatioVector::uniform(3), 3.0);
    ASSERT_TRUE(s.converged);
    EXPECT_NEAR(s.g.real(), (-9.0 + 3.0 * std::sqrt(9.0 - 8.0 / 3.0)) / 4.0, 1e-10);
    EXPECT_NEAR(s.g.imag(), 0.0, 1e-14);
    EXPECT_LE(s.residual, 1e-10);
    cplx sum = 0.0;
    for (auto p : s.parts) sum += p;
    EXPECT_LE(std::abs(sum - s.g), 1e-10);
}

TEST(FixedPoint, HypercubicOrderFive) {
    const auto s = solve_fixed_point(RatioVector::uniform(5), 3.0);
    ASSERT_TRUE(s.converged);
    EXPECT_NEAR(s.g.real(), oracle::g_hypercubic_real(5, 3.0), 1e-10);
}

TEST(FixedPoint, Tail) {
    const double z = 1e6;
    for (const auto& c : {RatioVector::uniform(3), RatioVector({0.2, 0.3, 0.5}), RatioVector::uniform(6)}) {
        const auto s = solve_fixed_point(c, z);
        ASSERT_TRUE(s.converged);
        EXPECT_NEAR(s.g.real() * z, -1.0, 1e-9);
    }
}

TEST(FixedPoint, StallsInsideSupport) {
    const auto s = solve_fixed_point(RatioVector::uniform(3), 0.5, 1e-12, 2000);
    EXPECT_FALSE(s.converged);
}

TEST(ClosedForms, CubicValues) {
    const double a = 2.0 * std::sqrt(2.0 / 3.0);
    EXPECT_NEAR(g_cubic_d3(a + 1e-9).real(), -1.5 * std::sqrt(2.0 / 3.0), 1e-4);
    EXPECT_NEAR(g_cubic_d3(2.0).real(), (-6.0 + 3.0 * std::sqrt(4.0 / 3.0)) / 4.0, 1e-15);
    for (double z : {1.7, 2.0, 3.0, 5.0, 10.0}) {
        EXPECT_NEAR(g_cubic_d3(z).real(), oracle::g_cubic_real(z), 1e-14);
        const auto s = solve_fixed_point(RatioVector::uniform(3), z);
        ASSERT_TRUE(s.converged) << z;
        EXPECT_NEAR(s.g.real(), g_cubic_d3(z).real(), 1e-10) << z;
    }
    EXPECT_THROW(g_cubic_d3(1.0), std::domain_error);
}

TEST(ClosedForms, Hypercubic) {
    for (double z : {1.7, 2.0, 3.0, 5.0, 10.0}) EXPECT_NEAR(std::abs(g_hypercubic(3, z) - g_cubic_d3(z)), 0.0, 1e-14);
    for (int k = 0; k < 10; ++k) {
        const cplx z(-2.0 + 0.4 * k, 0.3);
        EXPECT_NEAR(std::abs(g_hypercubic(3, z) - g_cubic_d3(z)), 0.0, 1e-14);
    }
    EXPECT_NEAR(g_hypercubic(2, 3.0).real(), -3.0 + std::sqrt(7.0), 1e-14);
    EXPECT_NEAR(right_edge(RatioVector::uniform(4)), std::sqrt(3.0), 1e-8);
    EXPECT_THROW(g_hypercubic(1, 3.0), std::invalid_argument);
}

TEST(ClosedForms, Matrix) {
    EXPECT_NEAR(g_matrix_case(0.5, 2.0).real(), -2.0 + std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(right_edge(RatioVector::matrix(0.5)), std::sqrt(2.0), 1e-8);
    for (double c : {0.1, 0.3, 0.5}) {
        for (double z : {2.0, 3.0, 6.0}) {
            EXPECT_NEAR(g_matrix_case(c, z).real(), oracle::g_matrix_real(c, z), 1e-13);
            const auto s = solve_fixed_point(RatioVector::matrix(c), z);
            ASSERT_TRUE(s.converged);
            EXPECT_NEAR(s.g.real(), g_matrix_case(c, z).real(), 1e-9);
        }
    }
    EXPECT_THROW(g_matrix_case(0.5, 1.0), std::domain_error);
}

TEST(ClosedForms, ComplexAgreesWithSolver) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> re(-3.0, 3.0), im(0.05, 2.0);
    for (int k = 0; k < 20; ++k) {
        const cplx z(re(gen), im(gen));
        EXPECT_LE(std::abs(stieltjes(RatioVector::uniform(3), z).g - g_cubic_d3(z)), 1e-9) << z;
        EXPECT_LE(std::abs(stieltjes(RatioVector::uniform(4), z).g - g_hypercubic(4, z)), 1e-9) << z;
        EXPECT_LE(std::abs(stieltjes(RatioVector::matrix(0.3), z).g - g_matrix_case(0.3, z)), 1e-9) << z;
    }
}

TEST(Edge, KnownValues) {
    EXPECT_NEAR(right_edge(RatioVector::uniform(3)), 2.0 * std::sqrt(2.0 / 3.0), 1e-6);
    EXPECT_NEAR(right_edge(RatioVector::uniform(6)), 2.0 * std::sqrt(5.0 / 6.0), 1e-6);
    EXPECT_NEAR(right_edge(RatioVector::matrix(0.3)), std::sqrt(1.0 + 2.0 * std::sqrt(0.21)), 1e-6);
}

TEST(Edge, SolverConvergesJustOutside) {
    const RatioVector c({0.2, 0.3, 0.5});
    const double e = right_edge(c);
    const auto s = stieltjes(c, e + 1e-3);
    EXPECT_TRUE(s.converged);
    EXPECT_LT(s.g.real(), 0.0);
    EXPECT_THROW(stieltjes(c, e - 1e-3), std::domain_error);
}

TEST(Density, CubicAtZeroAndOutside) {
    const auto m = LimitingMeasure::cubic_d3();
    EXPECT_NEAR(m.density(0.0), 3.0 / (4.0 * M_PI) * std::sqrt(8.0 / 3.0), 1e-14);
    for (const auto& mm : {m, LimitingMeasure::hypercubic(5), LimitingMeasure::matrix(0.3), LimitingMeasure::generic(RatioVector({0.2, 0.3, 0.5}))})
        EXPECT_EQ(mm.density(10.0), 0.0);
}

TEST(Density, GenericMatchesClosedForm) {
    const auto gen = LimitingMeasure::generic(RatioVector::uniform(3));
    const auto closed = LimitingMeasure::cubic_d3();
    const double e = closed.right_edge();
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double x = -1.1 * e + 2.2 * e * k / 49.0;
        worst = std::max(worst, std::abs(gen.density(x, 1e-6) - closed.density(x)));
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(Density, SymmetricAndNormalized) {
    for (const auto& m : {LimitingMeasure::cubic_d3(), LimitingMeasure::hypercubic(4), LimitingMeasure::matrix(0.25),
                          LimitingMeasure::generic(RatioVector({0.2, 0.3, 0.5})),
                          LimitingMeasure::generic(RatioVector({0.1, 1.0 / 6.0, 0.25, 29.0 / 60.0}))}) {
        for (int k = 1; k < 40; ++k) {
            const double x = m.right_edge() * k / 40.0;
            EXPECT_NEAR(m.density(x), m.density(-x), 1e-9);
            EXPECT_GE(m.density(x), 0.0);
        }
        EXPECT_NEAR(m.total_mass(), 1.0, 1e-6);
        EXPECT_NEAR(m.cdf(-m.right_edge() - 1.0), 0.0, 1e-12);
    }
}

TEST(Density, MatrixAtom) {
    const auto m = LimitingMeasure::matrix(0.25);
    EXPECT_NEAR(m.atom_at_zero(), 0.5, 1e-15);
    EXPECT_NEAR(m.cdf(1e-9) - m.cdf(-1e-9), 0.5, 1e-6);
    EXPECT_EQ(m.support().size(), 2u);
    const auto g = LimitingMeasure::generic(RatioVector::matrix(0.25));
    EXPECT_NEAR(g.atom_at_zero(), 0.5, 1e-12);
    EXPECT_NEAR(g.total_mass(), 1.0, 1e-6);
}

TEST(Properties, HerglotzOnRandomPoints) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> re(-4.0, 4.0), im(1e-3, 3.0);
    for (const auto& c : {RatioVector::uniform(3), RatioVector({0.2, 0.3, 0.5}), RatioVector({0.1, 0.2, 0.3, 0.4})}) {
        for (int k = 0; k < 40; ++k) {
            const cplx z(re(gen), im(gen));
            const auto s = stieltjes(c, z);
            EXPECT_GT(s.g.imag(), 0.0) << z;
            EXPECT_LE(quadratic_residual(c, z, s.g, s.parts), 1e-10) << z;
        }
    }
}

TEST(Properties, EliminatedRelationOrderThree) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> re(-3.0, 3.0), im(0.05, 2.0);
    const RatioVector c({0.2, 0.3, 0.5});
    for (int k = 0; k < 20; ++k) {
        const cplx z(re(gen), im(gen));
        const auto s = stieltjes(c, z);
        EXPECT_LE(std::abs(oracle::eliminated_relation(c.values(), z, s.g)), 1e-8) << z;
    }
    for (double z : {2.0, 3.0, 7.0}) EXPECT_LE(std::abs(oracle::eliminated_relation(c.values(), z, stieltjes(c, z).g)), 1e-8);
}

TEST(Properties, TailNormalization) {
    const RatioVector c({0.15, 0.35, 0.5});
    double prev = 0.0;
    for (double z : {1e2, 1e3, 1e4, 1e5}) {
        const double err = std::abs(z * stieltjes(c, z).g.real() + 1.0);
        if (prev > 0.0) EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-9);
}

TEST(RealBranchTest, MinimizerAndInverse) {
    const RealBranch rb(RatioVector({0.2, 0.3, 0.5}));
    EXPECT_NEAR(rb.dphi(rb.u_star), 0.0, 1e-10);
    for (double z : {rb.edge + 0.01, rb.edge + 1.0, 10.0}) {
        const double u = rb.u_of(z);
        EXPECT_GE(u, rb.u_star);
        EXPECT_NEAR(rb.phi(u), z, 1e-12 * z);
        double sum = 0.0;
        for (std::size_t i = 0; i < 3; ++i) sum += rb.part(i, u);
        EXPECT_NEAR(sum, rb.g(u), 1e-12);
    }
}
