#include <gtest/gtest.h>

#include "mgtn/random.hpp"
#include "mgtn/tt.hpp"
#include "support/oracles.hpp"

using namespace mgtn;

namespace {

TTVector random_tt(const Shape &modes, const Ranks &ranks, Rng &rng) {
    TTVector t;
    for (std::size_t n = 0; n < modes.size(); ++n) t.cores.push_back(random_normal({ranks[n], modes[n], ranks[n + 1]}, rng));
    return t;
}

TTMatrix random_ttm(const Shape &in, const Shape &out, const Ranks &ranks, Rng &rng) {
    TTMatrix m = TTMatrix::zeros(in, out, ranks);
    for (auto &c : m.cores) c = random_normal(c.shape(), rng);
    return m;
}

} // namespace

TEST(TTSvd, RankOneOuterProduct) {
    Rng rng(1);
    std::vector<Tensor> v;
    for (std::size_t d : {3, 4, 2, 5}) v.push_back(random_normal({d}, rng));
    Tensor x({3, 4, 2, 5});
    Shape idx(4, 0);
    do {
        x.at(idx) = v[0][idx[0]] * v[1][idx[1]] * v[2][idx[2]] * v[3][idx[3]];
    } while (oracle::next_index(idx, x.shape()));

    TTVector t = tt_svd(x, 1e-12);
    EXPECT_EQ(t.ranks(), (Ranks{1, 1, 1, 1, 1}));
    EXPECT_LE(relative_error(tt_reconstruct(t), x), 1e-12);
}

TEST(TTSvd, Order4GivesFourCores) {
    Rng rng(2);
    TTVector t = tt_svd(random_uniform({2, 3, 2, 3}, rng));
    ASSERT_EQ(t.order(), 4u);
    for (std::size_t n = 0; n < 4; ++n) EXPECT_EQ(t.cores[n].order(), 3u);
    EXPECT_EQ(t.ranks().front(), 1u);
    EXPECT_EQ(t.ranks().back(), 1u);
}

TEST(TTSvd, PlantedRanksRecovered) {
    Rng rng(3);
    const Ranks ranks{1, 2, 2, 2, 1};
    Tensor x = tt_reconstruct(random_tt({4, 5, 3, 4}, ranks, rng));
    TTVector t = tt_svd(x, ranks);
    EXPECT_EQ(t.ranks(), ranks);
    EXPECT_LE(relative_error(tt_reconstruct(t), x), 1e-8);
}

TEST(TTSvd, FullRankRoundTripRandom) {
    Rng rng(4);
    std::uniform_int_distribution<std::size_t> ord(2, 5), dim(1, 6);
    for (int trial = 0; trial < 20; ++trial) {
        Shape s(ord(rng));
        for (auto &d : s) d = dim(rng);
        Tensor x = random_uniform(s, rng);
        TTVector t = tt_svd(x);
        t.validate();
        EXPECT_LE(relative_error(tt_reconstruct(t), x), 1e-10);
    }
}

TEST(TTSvd, ToleranceBudgetRespected) {
    Rng rng(5);
    Tensor x = random_uniform({4, 4, 4, 4}, rng);
    const double delta = 0.3;
    auto res = tt_svd_detailed(x, TTSvdOptions{std::nullopt, delta});
    const double budget = delta * x.frobenius_norm() / std::sqrt(3.0);
    for (double e : res.step_errors) EXPECT_LE(e, budget + 1e-12);
    EXPECT_LE(relative_error(tt_reconstruct(res.tt), x), delta + 1e-12);
}

TEST(TTSvd, ErrorMonotoneInRankCap) {
    Rng rng(6);
    Tensor x = random_uniform({3, 4, 4, 3}, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t cap = 1; cap <= 12; ++cap) {
        const double err = relative_error(tt_reconstruct(tt_svd(x, Ranks{1, 3, cap, 3, 1})), x);
        EXPECT_LE(err, prev + 1e-12);
        prev = err;
    }
}

TEST(TTSvd, InvalidRankTuples) {
    Tensor x({2, 2, 2});
    EXPECT_THROW(tt_svd(x, Ranks{1, 2, 1}), ShapeError);
    EXPECT_THROW(tt_svd(x, Ranks{2, 2, 2, 1}), ShapeError);
    EXPECT_THROW(tt_svd(x, Ranks{1, 2, 2, 3}), ShapeError);
    EXPECT_THROW(tt_svd(x, 1.5), ShapeError);
    EXPECT_THROW(tt_svd(Tensor::scalar(1.0)), ShapeError);
}

TEST(TTSvd, OrderOneIsSingleCore) {
    const Tensor x = Tensor::vector({1.0, -2.0, 3.0, 0.5});
    const TTVector t = tt_svd(x);
    EXPECT_EQ(t.ranks(), (Ranks{1, 1}));
    EXPECT_EQ(tt_reconstruct(t), x);
    EXPECT_EQ(tt_reconstruct(tt_svd(x, 0.1)), x);
}

TEST(TTReconstruct, SingleCore) {
    Rng rng(7);
    TTVector t;
    t.cores.push_back(random_uniform({1, 5, 1}, rng));
    EXPECT_EQ(tt_reconstruct(t), t.cores[0].reshaped({5}));
}

TEST(TTReconstruct, ZeroCores) {
    TTVector t;
    t.cores = {Tensor({1, 2, 2}), Tensor({2, 3, 1})};
    EXPECT_EQ(tt_reconstruct(t), Tensor({2, 3}));
}

TEST(TTReconstruct, BoundaryRankViolation) {
    TTVector t;
    t.cores = {Tensor({2, 2, 2}), Tensor({2, 3, 1})};
    EXPECT_THROW(tt_reconstruct(t), ShapeError);
}

TEST(TTMatrix, IdentityCoresLeaveInputUnchanged) {
    TTMatrix m = TTMatrix::zeros({3, 4}, {3, 4}, {1, 1, 1});
    for (auto &c : m.cores)
        for (std::size_t i = 0; i < c.dim(1); ++i) c(0, i, i, 0) = 1.0;
    Rng rng(8);
    Tensor x = random_uniform({3, 4}, rng);
    EXPECT_EQ(tt_matrix_apply(m, x), x);
}

TEST(TTMatrix, TradingShapedApplyMatchesDenseOracle) {
    Rng rng(9);
    TTMatrix m = random_ttm({4, 30, 9}, {3, 3, 3}, {1, 2, 2, 1}, rng);
    Tensor x = random_uniform({4, 30, 9}, rng);
    Tensor y = tt_matrix_apply(m, x);
    EXPECT_EQ(y.shape(), (Shape{3, 3, 3}));
    const Tensor dense = oracle::tt_matrix_dense_loops(m);
    const auto ref = oracle::matvec(dense, x.data());
    const Tensor ref_t = Tensor({3, 3, 3}, ref);
    EXPECT_LE(relative_error(y, ref_t), 1e-10);
}

TEST(TTMatrix, RandomConfigurationsMatchDenseOracle) {
    Rng rng(10);
    std::uniform_int_distribution<std::size_t> nc(1, 3), dim(1, 4), rk(1, 3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = nc(rng);
        Shape in(n), out(n);
        Ranks r(n + 1, 1);
        for (std::size_t k = 0; k < n; ++k) in[k] = dim(rng), out[k] = dim(rng);
        for (std::size_t k = 1; k < n; ++k) r[k] = rk(rng);
        TTMatrix m = random_ttm(in, out, r, rng);
        Tensor x = random_uniform(in, rng);
        const Tensor dense = oracle::tt_matrix_dense_loops(m);
        EXPECT_LE(max_abs_diff(tt_matrix_to_dense(m), dense), 1e-12);
        const Tensor ref = Tensor(out, oracle::matvec(dense, x.data()));
        EXPECT_LE(relative_error(tt_matrix_apply(m, x), ref), 1e-10);
    }
}

TEST(TTMatrix, ShapeMismatch) {
    TTMatrix m = TTMatrix::zeros({3, 4}, {2, 2}, {1, 2, 1});
    EXPECT_THROW(tt_matrix_apply(m, Tensor({4, 3})), ShapeError);
    EXPECT_THROW(TTMatrix::zeros({3, 4}, {2, 2}, {1, 2, 2, 1}), ShapeError);
}

TEST(TTMatrix, BackwardMatchesFiniteDifferences) {
    Rng rng(12);
    TTMatrix m = random_ttm({2, 3, 2}, {2, 2, 3}, {1, 2, 3, 1}, rng);
    const std::size_t batch = 3;
    Tensor x = random_uniform({m.input_size(), batch}, rng);
    Tensor w = random_uniform({m.output_size(), batch}, rng); // loss = <w, y>
    std::vector<Tensor> states, grads;
    tt_matrix_apply_batch(m, x, batch, &states);
    Tensor dx = tt_matrix_backward_batch(m, states, w, batch, grads);
    auto loss = [&](const TTMatrix &mm, const Tensor &xx) { return dot(w, tt_matrix_apply_batch(mm, xx, batch)); };
    const double h = 1e-6;
    for (std::size_t k = 0; k < m.order(); ++k)
        for (std::size_t i = 0; i < m.cores[k].size(); ++i) {
            TTMatrix p = m, q = m;
            p.cores[k][i] += h;
            q.cores[k][i] -= h;
            EXPECT_NEAR(grads[k][i], (loss(p, x) - loss(q, x)) / (2 * h), 1e-7);
        }
    for (std::size_t i = 0; i < x.size(); ++i) {
        Tensor p = x, q = x;
        p[i] += h;
        q[i] -= h;
        EXPECT_NEAR(dx[i], (loss(m, p) - loss(m, q)) / (2 * h), 1e-7);
    }
}

TEST(TTParamCount, ClosedForms) {
    EXPECT_EQ(tt_param_count(TTMatrix::zeros({2, 2}, {2, 2}, {1, 1, 1})), 8u);
    EXPECT_EQ(tt_param_count(TTMatrix::zeros({16, 30, 9}, {3, 3, 3}, {1, 2, 2, 1})), 510u);
    Rng rng(13);
    std::uniform_int_distribution<std::size_t> dim(2, 8);
    for (int trial = 0; trial < 30; ++trial) {
        Shape in{dim(rng), dim(rng), dim(rng)}, out{dim(rng), dim(rng), dim(rng)};
        TTMatrix m = TTMatrix::zeros(in, out, {1, 2, 2, 1});
        EXPECT_LT(tt_param_count(m), m.input_size() * m.output_size());
    }
}

TEST(TTParamCount, VectorCount) {
    TTVector t;
    t.cores = {Tensor({1, 3, 2}), Tensor({2, 4, 1})};
    EXPECT_EQ(tt_param_count(t), 6u + 8u);
}

TEST(Factorize, NearEqual) {
    EXPECT_EQ(factorize_near_equal(27, 3), (Shape{3, 3, 3}));
    EXPECT_EQ(factorize_near_equal(8, 3), (Shape{2, 2, 2}));
    EXPECT_EQ(factorize_near_equal(92, 3), (Shape{23, 2, 2}));
    EXPECT_EQ(factorize_near_equal(12, 2), (Shape{4, 3}));
    EXPECT_EQ(factorize_near_equal(5, 3), (Shape{5, 1, 1}));
}

TEST(TTMatrix, GlorotInitReconstructedVariance) {
    Rng rng(14);
    TTMatrix m = TTMatrix::glorot({8, 10, 9}, {3, 3, 3}, {1, 2, 2, 1}, rng);
    const Tensor d = tt_matrix_to_dense(m);
    double var = 0.0;
    for (double v : d.data()) var += v * v;
    var /= static_cast<double>(d.size());
    const double target = 2.0 / (720.0 + 27.0);
    EXPECT_GT(var, 0.2 * target);
    EXPECT_LT(var, 5.0 * target);
}
