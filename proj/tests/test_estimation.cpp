#include "oracles.hpp"

#include "spiked/asymptotics.hpp"
#include "spiked/block_matrix.hpp"
#include "spiked/estimation.hpp"
#include "spiked/spectral.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>

using namespace spiked;

namespace {

double align(const Vec& a, const Vec& b) { return std::abs(a.dot(b)); }

std::vector<Vec> random_vecs(const Dims& dims, std::uint64_t seed) {
    std::vector<Vec> vs;
    for (std::size_t k = 0; k < dims.size(); ++k) vs.push_back(UnitVector::random(dims[k], seed, 500 + k).vec());
    return vs;
}

}  // namespace

TEST(Init, Validation) {
    EXPECT_THROW(InitStrategy::annealed({1.0, 2.0}, 1).validate(), std::invalid_argument);
    EXPECT_THROW(InitStrategy::annealed({2.0, 2.0}, 1).validate(), std::invalid_argument);
    EXPECT_THROW(InitStrategy::annealed({}, 1).validate(), std::invalid_argument);
    EXPECT_NO_THROW(InitStrategy::annealed({3.0, 2.0, 1.0}, 1).validate());
    EXPECT_EQ(parse_init_kind("planted"), InitStrategy::Kind::Planted);
    EXPECT_EQ(to_string(InitStrategy::Kind::Annealed), "annealed");
    EXPECT_THROW(parse_init_kind("greedy"), std::invalid_argument);
    const auto t = sample_gaussian_tensor({3, 3, 3}, 1);
    EXPECT_THROW(power_iteration(t, InitStrategy::annealed({2.0, 1.0}, 1)), std::invalid_argument);
    EXPECT_THROW(power_iteration(t, InitStrategy::planted_at({Vec::Ones(3), Vec::Ones(4), Vec::Ones(3)})), std::invalid_argument);
}

TEST(Power, NoiselessRankOneFromRandomInit) {
    const Dims dims{20, 25, 30};
    const auto xs = random_vecs(dims, 2);
    const auto t = 5.0 * rank_one_tensor(xs);
    const auto tup = power_iteration(t, InitStrategy::random(3));
    ASSERT_TRUE(tup.converged);
    EXPECT_LE(tup.iterations, 3);
    EXPECT_NEAR(tup.lambda, 5.0, 1e-10);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(align(tup.vectors[k], xs[k]), 1.0, 1e-10);
}

TEST(Power, RejectsZeroTensor) {
    EXPECT_THROW(power_iteration(DenseTensor({4, 4, 4}), InitStrategy::random(1)), std::invalid_argument);
}

TEST(Power, RestartsWhenInitIsOrthogonalToTheData) {
    // only e_0 (x) e_0 (x) e_0 is nonzero; a planted start orthogonal to e_0
    // makes the first contraction vanish
    DenseTensor t({3, 3, 3});
    t({0, 0, 0}) = 2.0;
    const Vec off = UnitVector::basis(3, 1).vec();
    const auto tup = power_iteration(t, InitStrategy::planted_at({off, off, off}));
    EXPECT_GE(tup.restarts, 1);
    ASSERT_TRUE(tup.converged);
    EXPECT_NEAR(tup.lambda, 2.0, 1e-12);
}

TEST(Power, PlantedCubicMatchesTheory) {
    const Dims dims{50, 50, 50};
    double lam = 0.0, al = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const auto m = SpikeModel::random(3.0, dims, 100 + static_cast<std::uint64_t>(s));
        const auto t = build_spiked_tensor(m, 100 + static_cast<std::uint64_t>(s));
        const auto tup = power_iteration(t, InitStrategy::planted_at(as_vecs(m.components)));
        ASSERT_TRUE(tup.converged);
        lam += tup.lambda / seeds;
        al += align(tup.vectors[0], m.components[0].vec()) / seeds;
    }
    EXPECT_NEAR(lam, oracle::cubic_lambda(3.0), 0.03);
    EXPECT_NEAR(al, oracle::cubic_alignment(3.0), 0.03);
}

TEST(Power, NoSignalStaysNearEdge) {
    const Dims dims{100, 100, 100};
    const auto t = build_spiked_tensor(SpikeModel::random(0.0, dims, 5), 5);
    PowerOptions o;
    o.max_sweeps = 5000;
    const auto tup = power_iteration(t, InitStrategy::random(5), o);
    ASSERT_TRUE(tup.converged);
    EXPECT_LE(tup.lambda, 2.0 * std::sqrt(2.0 / 3.0) + 0.15);
}

TEST(Power, KktResidualsAndFullContraction) {
    const Dims dims{15, 20, 25};
    const auto m = SpikeModel::random(2.0, dims, 6);
    const auto t = build_spiked_tensor(m, 6);
    const auto tup = power_iteration(t, InitStrategy::random(6));
    ASSERT_TRUE(tup.converged);
    EXPECT_GE(tup.lambda, 0.0);
    EXPECT_NEAR(tup.lambda, contract_full(t, tup.vectors), 1e-10);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(tup.vectors[k].norm(), 1.0, 1e-12);
        const double r = (oracle::all_but_one(t, tup.vectors, k) - tup.lambda * tup.vectors[k]).norm();
        EXPECT_LE(r, 1e-10 * std::max(1.0, tup.lambda));
        EXPECT_NEAR(tup.residuals[k], r, 1e-12);
    }
}

TEST(Power, ScaleEquivariance) {
    const Dims dims{12, 14, 16};
    const auto t = build_spiked_tensor(SpikeModel::random(2.5, dims, 7), 7);
    const auto a = power_iteration(t, InitStrategy::random(7));
    const auto b = power_iteration(3.5 * t, InitStrategy::random(7));
    ASSERT_TRUE(a.converged && b.converged);
    EXPECT_NEAR(b.lambda, 3.5 * a.lambda, 1e-8);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(align(a.vectors[k], b.vectors[k]), 1.0, 1e-8);
}

TEST(Power, IsolatedEigenvalueAtEveryBeta) {
    for (const Dims& dims : {Dims{20, 20, 20}, Dims{10, 12, 14, 9}}) {
        const double mult = static_cast<double>(dims.size()) - 1.0;
        for (double beta : {0.0, 1.0, 3.0}) {
            const auto m = SpikeModel::random(beta, dims, 8);
            const auto t = build_spiked_tensor(m, 8);
            PowerOptions o;
            o.max_sweeps = 5000;
            const auto tup = power_iteration(t, InitStrategy::random(8), o);
            ASSERT_TRUE(tup.converged) << beta;
            const auto sp = eig_sym(phi(t, tup.vectors), false);
            EXPECT_NEAR(sp.eigenvalues[sp.eigenvalues.size() - 1], mult * tup.lambda, 1e-8) << beta;
        }
    }
}

TEST(Power, MatrixCaseFindsTopSingularValue) {
    const auto t = build_spiked_tensor(SpikeModel::random(2.0, {30, 40}, 9), 9);
    const auto tup = power_iteration(t, InitStrategy::random(9));
    ASSERT_TRUE(tup.converged);
    const Mat m = unfold(t, 0);
    Eigen::JacobiSVD<Mat> svd(m);
    EXPECT_NEAR(tup.lambda, svd.singularValues()[0], 1e-8);
}

TEST(Annealed, LengthOneGridEqualsPlain) {
    const Dims dims{15, 15, 15};
    const auto m = SpikeModel::random(1.0, dims, 10);
    const auto noise = sample_gaussian_tensor(dims, 10);
    auto build = [&](double b) {
        SpikeModel mm = m;
        mm.beta = b;
        return build_spiked_tensor(mm, noise);
    };
    const auto path = annealed_power_iteration(build, {2.0}, 11);
    ASSERT_EQ(path.size(), 1u);
    const auto plain = power_iteration(build(2.0), InitStrategy::random(11));
    EXPECT_EQ(path[0].lambda, plain.lambda);
    EXPECT_EQ(path[0].iterations, plain.iterations);
    EXPECT_EQ(path[0].vectors[0], plain.vectors[0]);
}

TEST(Annealed, TracksTheoryAboveThreshold) {
    const Dims dims{50, 50, 50};
    const auto m = SpikeModel::random(1.0, dims, 12);
    const auto noise = sample_gaussian_tensor(dims, 12);
    auto build = [&](double b) {
        SpikeModel mm = m;
        mm.beta = b;
        return build_spiked_tensor(mm, noise);
    };
    std::vector<double> grid;
    for (double b = 5.0; b > 0.49; b -= 0.25) grid.push_back(b);
    const auto path = annealed_power_iteration(build, grid, 13);
    ASSERT_EQ(path.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] <= 1.5) continue;
        ASSERT_TRUE(path[i].converged) << grid[i];
        EXPECT_NEAR(align(path[i].vectors[0], m.components[0].vec()), oracle::cubic_alignment(grid[i]), 0.05) << grid[i];
    }
}

TEST(Annealed, DecaysBelowThreshold) {
    const Dims dims{100, 100, 100};
    std::vector<double> grid;
    for (double b = 5.0; b > 0.49; b -= 0.25) grid.push_back(b);
    PowerOptions o;
    o.max_sweeps = 5000;
    double low = 0.0;
    const int seeds = 5;
    for (int s = 0; s < seeds; ++s) {
        const auto seed = 14 + static_cast<std::uint64_t>(s);
        const auto m = SpikeModel::random(1.0, dims, seed);
        const auto noise = sample_gaussian_tensor(dims, seed);
        auto build = [&](double b) {
            SpikeModel mm = m;
            mm.beta = b;
            return build_spiked_tensor(mm, noise);
        };
        const auto path = annealed_power_iteration(build, grid, seed + 100, o);
        for (std::size_t k = 0; k < 3; ++k) low += align(path.back().vectors[k], m.components[k].vec()) / (3.0 * seeds);
    }
    EXPECT_LE(low, 0.2);
}

TEST(Unfold, RoundTripAndLayout) {
    const Dims dims{3, 4, 5};
    const auto t = sample_gaussian_tensor(dims, 16);
    for (std::size_t mode = 0; mode < 3; ++mode) {
        const Mat m = unfold(t, mode);
        EXPECT_EQ(static_cast<std::size_t>(m.rows()), dims[mode]);
        EXPECT_EQ(refold(m, dims, mode).data(), t.data());
    }
    // mode 1: row j, column i * 5 + k
    const Mat m1 = unfold(t, 1);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t k = 0; k < 5; ++k)
                EXPECT_EQ(m1(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i * 5 + k)), t({i, j, k}));
    EXPECT_THROW(unfold(t, 3), std::invalid_argument);
}

TEST(Unfold, RankOne) {
    const auto vs = random_vecs({4, 5, 6}, 17);
    const Mat m = unfold(rank_one_tensor(vs), 0);
    Vec rest(30);
    for (Eigen::Index j = 0; j < 5; ++j)
        for (Eigen::Index k = 0; k < 6; ++k) rest[j * 6 + k] = vs[1][j] * vs[2][k];
    EXPECT_LE((m - vs[0] * rest.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Unfold, TopSingularMatchesJacobi) {
    for (auto shape : {std::pair<int, int>{7, 30}, std::pair<int, int>{30, 7}, std::pair<int, int>{12, 12}}) {
        const auto g = sample_gaussian_tensor({static_cast<std::size_t>(shape.first), static_cast<std::size_t>(shape.second)}, 18);
        const Mat m = unfold(g, 0);
        Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto ts = top_singular(m);
        EXPECT_NEAR(ts.sigma, svd.singularValues()[0], 1e-10);
        EXPECT_NEAR(align(ts.left, svd.matrixU().col(0)), 1.0, 1e-10);
        EXPECT_NEAR(align(ts.right, svd.matrixV().col(0)), 1.0, 1e-10);
        EXPECT_LE((m * ts.right - ts.sigma * ts.left).norm(), 1e-10);
    }
}

TEST(Unfold, AlignmentMatchesMatrixTheory) {
    const Dims dims{50, 50, 50};
    const double beta = 2.0;
    const auto pred = predict_unfolding(beta, dims, 0);
    double mean = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const auto m = SpikeModel::random(beta, dims, 200 + static_cast<std::uint64_t>(s));
        const auto t = build_spiked_tensor(m, 200 + static_cast<std::uint64_t>(s));
        mean += align(top_singular(unfold(t, 0)).left, m.components[0].vec()) / seeds;
    }
    EXPECT_NEAR(mean, pred.align_x, 0.05);
}

TEST(Deflation, NoiselessOrthogonalPair) {
    const Dims dims{10, 12, 14};
    const auto sp = sample_orthogonal_spikes(dims, {4.0, 2.0}, 19);
    DenseTensor t(dims);
    for (std::size_t l = 0; l < 2; ++l) add_rank_one(t, sp.betas[l], sp.components[l]);
    const auto out = deflate_orthogonal(t, 2, {InitStrategy::random(20), InitStrategy::random(21)});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_NEAR(out[0].lambda, 4.0, 1e-10);
    EXPECT_NEAR(out[1].lambda, 2.0, 1e-10);
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(align(out[l].vectors[k], sp.components[l][k]), 1.0, 1e-10);
}

TEST(Deflation, OrthogonalComponents) {
    const Dims dims{8, 9, 10};
    const auto sp = sample_orthogonal_spikes(dims, {3.0, 2.0, 1.0}, 22);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b)
                EXPECT_NEAR(sp.components[a][k].dot(sp.components[b][k]), a == b ? 1.0 : 0.0, 1e-12);
    EXPECT_THROW(sample_orthogonal_spikes({2, 5, 5}, {3.0, 2.0, 1.0}, 1), std::invalid_argument);
}

TEST(Deflation, NoisyPairMatchesRankOneTheory) {
    const Dims dims{40, 40, 40};
    const auto sp = sample_orthogonal_spikes(dims, {4.0, 2.5}, 23);
    const auto t = build_orthogonal_tensor(sp, dims, 23);
    const auto out = deflate_orthogonal(t, 2, {InitStrategy::planted_at(sp.components[0]), InitStrategy::planted_at(sp.components[1])});
    for (std::size_t l = 0; l < 2; ++l) {
        ASSERT_TRUE(out[l].converged);
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(align(out[l].vectors[k], sp.components[l][k]), oracle::cubic_alignment(sp.betas[l]), 0.08);
            EXPECT_LE(align(out[l].vectors[k], sp.components[1 - l][k]), 0.15);
        }
    }
}
