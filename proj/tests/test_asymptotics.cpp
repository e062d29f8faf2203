#include "oracles.hpp"

#include "spiked/asymptotics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace spiked;

namespace {

RatioVector random_interior(std::size_t d, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    std::vector<double> c(d);
    double s = 0.0;
    for (auto& x : c) s += (x = u(gen));
    for (auto& x : c) x /= s;
    c.back() = 1.0;
    for (std::size_t i = 0; i + 1 < d; ++i) c.back() -= c[i];
    return RatioVector(c);
}

}  // namespace

TEST(Cubic, GenericMatchesClosedForms) {
    for (double b : {1.3, 2.0, 3.0, 5.0}) {
        const auto p = predict(b, RatioVector::uniform(3));
        ASSERT_TRUE(p.above_threshold);
        EXPECT_NEAR(p.lambda_inf, oracle::cubic_lambda(b), 1e-8) << b;
        for (double q : p.alignments) EXPECT_NEAR(q, oracle::cubic_alignment(b), 1e-8) << b;
        const auto cp = predict_cubic_d3(b);
        EXPECT_NEAR(cp.lambda_inf, oracle::cubic_lambda(b), 1e-12);
        EXPECT_NEAR(cp.alignment, oracle::cubic_alignment(b), 1e-12);
    }
}

TEST(Cubic, LargeSnrAsymptote) {
    const auto p = predict(50.0, RatioVector::uniform(3));
    EXPECT_GE(p.lambda_inf / 50.0, 0.999);
    EXPECT_LE(p.lambda_inf / 50.0, 1.001);
    for (double q : p.alignments) EXPECT_GE(q, 0.999);
}

TEST(Cubic, AtAndBelowThreshold) {
    const double bs = 2.0 * std::sqrt(3.0) / 3.0;
    EXPECT_NEAR(cubic_d3_beta_s(), bs, 1e-15);
    const auto at = predict_cubic_d3(bs);
    EXPECT_NEAR(at.lambda_inf, 2.0 * std::sqrt(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(predict_cubic_d3(bs + 1e-12).alignment, std::sqrt(2.0) / 2.0, 1e-5);
    const auto below = predict_cubic_d3(1.0);
    EXPECT_FALSE(below.above_threshold);
    EXPECT_EQ(below.alignment, 0.0);
    EXPECT_NEAR(below.lambda_inf, 2.0 * std::sqrt(2.0 / 3.0), 1e-12);
}

TEST(Cubic, SeriesExpansion) {
    const double bs = cubic_d3_beta_s();
    const auto e = cubic_d3_expansion(bs + 0.01);
    EXPECT_LE(std::abs(e.lambda_inf - oracle::cubic_lambda(bs + 0.01)), 5e-5);
    EXPECT_LE(std::abs(e.alignment - oracle::cubic_alignment(bs + 0.01)), 5e-4);
    // remainder shrinks faster than the squared offset
    const double r1 = std::abs(cubic_d3_expansion(bs + 0.02).lambda_inf - oracle::cubic_lambda(bs + 0.02));
    const double r2 = std::abs(cubic_d3_expansion(bs + 0.005).lambda_inf - oracle::cubic_lambda(bs + 0.005));
    EXPECT_LT(r2, r1 / 16.0);
}

TEST(Rectangular, KnownThresholds) {
    const RatioVector c({1.0 / 6.0, 1.0 / 3.0, 0.5});
    EXPECT_NEAR(compute_beta_s(c), 1.1134, 5e-3);
    const auto p = predict(0.5, c);
    EXPECT_FALSE(p.above_threshold);
    for (double q : p.alignments) EXPECT_EQ(q, 0.0);
    EXPECT_NEAR(p.lambda_inf, right_edge(c), 1e-12);
    EXPECT_NEAR(compute_beta_s(RatioVector({0.1, 1.0 / 6.0, 0.25, 29.0 / 60.0})), 1.234, 1e-2);
    EXPECT_NEAR(compute_beta_s(RatioVector::uniform(3)), 2.0 * std::sqrt(3.0) / 3.0, 1e-6);
}

TEST(Rectangular, ThresholdReportCandidates) {
    const auto r = threshold_report(RatioVector({1.0 / 6.0, 1.0 / 3.0, 0.5}));
    EXPECT_EQ(r.beta_s, std::min(r.edge_candidate, r.fold_candidate));
    EXPECT_GE(r.fold_lambda, r.right_edge);
    EXPECT_NEAR(r.right_edge, right_edge(RatioVector({1.0 / 6.0, 1.0 / 3.0, 0.5})), 1e-12);
}

TEST(Hypercubic, ClosedFormAgreesWithNumeric) {
    for (int d = 3; d <= 8; ++d) {
        const auto h = hypercubic_beta_s(d);
        EXPECT_NEAR(h.beta_s, oracle::hypercubic_beta_s(d), 1e-14);
        EXPECT_NEAR(h.alignment, std::sqrt((d - 2.0) / (d - 1.0)), 1e-14);
        EXPECT_NEAR(compute_beta_s(RatioVector::uniform(static_cast<std::size_t>(d))), h.beta_s, 1e-6) << d;
    }
    EXPECT_NEAR(hypercubic_beta_s(3).beta_s, 2.0 * std::sqrt(3.0) / 3.0, 1e-14);
    EXPECT_NEAR(hypercubic_beta_s(3).alignment, std::sqrt(2.0) / 2.0, 1e-14);
    EXPECT_THROW(hypercubic_beta_s(2), std::invalid_argument);
}

TEST(Hypercubic, MonotoneInOrder) {
    double pb = 0.0, pa = 0.0;
    for (int d = 3; d <= 20; ++d) {
        const auto h = hypercubic_beta_s(d);
        EXPECT_GT(h.beta_s, pb);
        EXPECT_GT(h.alignment, pa);
        EXPECT_LT(h.beta_s, 1.65);
        pb = h.beta_s;
        pa = h.alignment;
    }
    EXPECT_GT(pb, 1.55);
    EXPECT_GT(pa, 0.97);
}

TEST(Matrix, ClosedForms) {
    EXPECT_NEAR(predict_matrix(1.0, 0.5).beta_s, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(predict_matrix(1.0, 0.5).lambda_inf, 1.5, 1e-15);
    for (double c : {0.1, 0.3, 0.5, 0.8}) {
        for (double b : {1.0, 1.5, 3.0}) {
            const auto m = predict_matrix(b, c);
            ASSERT_TRUE(m.above_threshold);
            EXPECT_NEAR(m.lambda_inf, oracle::matrix_lambda(b, c), 1e-14);
            EXPECT_NEAR(m.align_x, 1.0 / oracle::kappa(b, c), 1e-14);
            EXPECT_NEAR(m.align_y, 1.0 / oracle::kappa(b, 1.0 - c), 1e-14);
            EXPECT_NEAR(matrix_kappa(b, c), oracle::kappa(b, c), 1e-14);
        }
    }
}

TEST(Matrix, ContinuousAtThreshold) {
    const double c = 0.3;
    const double bs = std::pow(c * (1.0 - c), 0.25);
    const double edge = std::sqrt(1.0 + 2.0 * std::sqrt(c * (1.0 - c)));
    EXPECT_NEAR(predict_matrix(bs, c).lambda_inf, edge, 1e-12);
    const auto just = predict_matrix(bs + 1e-8, c);
    EXPECT_NEAR(just.lambda_inf, edge, 1e-6);
    EXPECT_LE(just.align_x, 1e-2);
    EXPECT_LE(just.align_y, 1e-2);
    const auto below = predict_matrix(0.0, c);
    EXPECT_FALSE(below.above_threshold);
    EXPECT_EQ(below.align_x, 0.0);
}

TEST(Matrix, EmbeddingRoutesThroughMatrixForm) {
    const auto p = predict(1.5, RatioVector::matrix(0.3));
    const auto m = predict_matrix(1.5, 0.3);
    EXPECT_NEAR(p.lambda_inf, m.lambda_inf, 1e-12);
    EXPECT_NEAR(p.alignments[0], m.align_x, 1e-12);
    EXPECT_NEAR(p.alignments[1], m.align_y, 1e-12);
    EXPECT_NEAR(p.beta_s, m.beta_s, 1e-12);
}

TEST(Snr, RoundTrip) {
    for (const auto& c : {RatioVector::uniform(3), RatioVector({0.2, 0.3, 0.5}), RatioVector::uniform(5)}) {
        for (double b : {1.8, 2.5, 4.0}) {
            const auto p = predict(b, c);
            ASSERT_TRUE(p.above_threshold);
            EXPECT_NEAR(estimate_snr_from_lambda(p.lambda_inf, c), b, 1e-8);
        }
    }
    EXPECT_NEAR(estimate_snr_from_lambda(oracle::cubic_lambda(2.0), RatioVector::uniform(3)), 2.0, 1e-8);
}

TEST(Snr, EdgeLimitAndErrors) {
    const auto c = RatioVector::uniform(3);
    const double e = right_edge(c);
    EXPECT_NEAR(estimate_snr_from_lambda(e + 1e-9, c), compute_beta_s(c), 1e-3);
    EXPECT_THROW(estimate_snr_from_lambda(e - 1e-3, c), BelowEdgeError);
    EXPECT_THROW(estimate_snr_from_lambda(e, c), BelowEdgeError);
}

TEST(Snr, OrderThreeFormMatchesGeneral) {
    for (const auto& c : {RatioVector::uniform(3), RatioVector({0.2, 0.3, 0.5}), RatioVector({1.0 / 6.0, 1.0 / 3.0, 0.5})}) {
        for (double lam : {1.8, 2.5, 4.0})
            EXPECT_NEAR(estimate_snr_order3(lam, c), estimate_snr_from_lambda(lam, c), 1e-10);
    }
}

TEST(Properties, AlignmentFormsAgree) {
    std::mt19937_64 gen(11);
    for (std::size_t d : {3u, 4u, 5u}) {
        for (int k = 0; k < 5; ++k) {
            const auto c = random_interior(d, gen);
            const double beta = 2.5;
            const auto p = predict(beta, c);
            ASSERT_TRUE(p.above_threshold);
            const auto af = alignment_functions(beta, c, p.lambda_inf);
            const auto q2 = alignments_from_alpha(af.alpha);
            for (std::size_t i = 0; i < d; ++i) {
                EXPECT_NEAR(af.q[i], q2[i], 1e-8);
                EXPECT_NEAR(p.alignments[i], af.q[i], 1e-12);
            }
        }
    }
}

TEST(Properties, SelfConsistency) {
    std::mt19937_64 gen(12);
    for (std::size_t d : {3u, 4u, 5u}) {
        const auto c = random_interior(d, gen);
        for (double beta : {2.0, 3.0, 6.0}) {
            const auto p = predict(beta, c);
            ASSERT_TRUE(p.above_threshold);
            EXPECT_LE(std::abs(spike_equation(p.lambda_inf, beta, c)), 1e-9);
            EXPECT_LE(std::abs(p.f_residual), 1e-9);
            double prod = beta;
            for (double q : p.alignments) prod *= q;
            EXPECT_NEAR(p.lambda_inf + stieltjes(c, p.lambda_inf).g.real(), prod, 1e-8);
            EXPECT_GT(p.lambda_inf, p.right_edge);
            for (double q : p.alignments) EXPECT_GT(q, 0.0);
            EXPECT_NEAR(inverse_snr_map(p.lambda_inf, c), beta, 1e-8);
        }
    }
}

TEST(Properties, MonotoneAboveThreshold) {
    for (const auto& c : {RatioVector::uniform(3), RatioVector({0.2, 0.3, 0.5}), RatioVector::uniform(4)}) {
        const double bs = compute_beta_s(c);
        auto prev = predict(bs + 1e-3, c);
        for (double b = bs + 0.05; b <= 10.0; b += 0.05) {
            const auto p = predict(b, c);
            EXPECT_GE(p.lambda_inf, prev.lambda_inf - 1e-12);
            for (std::size_t i = 0; i < c.order(); ++i) EXPECT_GE(p.alignments[i], prev.alignments[i] - 1e-12);
            prev = p;
        }
    }
}

TEST(Properties, DiscontinuityForTensors) {
    for (int d = 3; d <= 6; ++d) {
        const auto c = RatioVector::uniform(static_cast<std::size_t>(d));
        const double bs = compute_beta_s(c);
        const auto just = predict(bs + 1e-7, c);
        EXPECT_NEAR(just.alignments[0], std::sqrt((d - 2.0) / (d - 1.0)), 1e-3) << d;
        EXPECT_EQ(predict(bs - 1e-3, c).alignments[0], 0.0);
    }
}

TEST(Unfolding, ThresholdValues) {
    EXPECT_NEAR(unfolding_threshold({100, 100, 100}), std::pow(1e6, 0.25) / std::sqrt(300.0), 1e-12);
    const Dims dims{50, 50, 50};
    const auto m = unfolding_map(dims, 0);
    EXPECT_NEAR(m.c, 50.0 / (50.0 + 2500.0), 1e-15);
    // the matrix threshold mapped back to tensor units is the unfolding threshold
    EXPECT_NEAR(std::pow(m.c * (1.0 - m.c), 0.25) / m.beta_scale, unfolding_threshold(dims), 1e-10);
    const double b = 2.0 * unfolding_threshold(dims);
    EXPECT_NEAR(predict_unfolding(b, dims, 0).align_x, predict_matrix(b * m.beta_scale, m.c).align_x, 1e-12);
}

// d log t / d n_i = 1/(4 n_i) - 1/(2 sum n), so the threshold grows in n_i
// exactly while n_i stays below the sum of the other dims.
TEST(Unfolding, MonotoneInEachDimWhileNotDominant) {
    const Dims dims{10, 12, 14, 16};
    for (std::size_t k = 0; k < dims.size(); ++k) {
        std::size_t rest = 0;
        for (std::size_t j = 0; j < dims.size(); ++j) rest += j == k ? 0 : dims[j];
        Dims d2 = dims;
        double prev = unfolding_threshold(d2);
        while (d2[k] + 1 < rest) {
            ++d2[k];
            const double t = unfolding_threshold(d2);
            EXPECT_GT(t, prev) << k << " " << d2[k];
            prev = t;
        }
        d2[k] = rest + 5;
        const double past = unfolding_threshold(d2);
        ++d2[k];
        EXPECT_LT(unfolding_threshold(d2), past);
    }
}

TEST(Unfolding, EqualDimsScaling) {
    // n^{(d-2)/4} up to the constant 1/sqrt(d)
    for (int d = 3; d <= 5; ++d) {
        for (std::size_t n : {10u, 40u, 160u}) {
            const Dims dims(static_cast<std::size_t>(d), n);
            EXPECT_NEAR(unfolding_threshold(dims) * std::sqrt(static_cast<double>(d)), std::pow(static_cast<double>(n), (d - 2) / 4.0), 1e-9 * std::pow(static_cast<double>(n), d / 4.0));
        }
    }
}
