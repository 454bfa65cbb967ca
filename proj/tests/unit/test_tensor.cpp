#include <gtest/gtest.h>

#include <sstream>

#include "mgtn/random.hpp"
#include "mgtn/tensor.hpp"
#include "mgtn/tensor_io.hpp"
#include "support/oracles.hpp"

using namespace mgtn;

namespace {

Shape random_shape(Rng &rng, std::size_t order, std::size_t max_dim) {
    std::uniform_int_distribution<std::size_t> d(1, max_dim);
    Shape s(order);
    for (auto &v : s) v = d(rng);
    return s;
}

} // namespace

TEST(Tensor, ScalarHasEmptyShapeAndOneEntry) {
    Tensor s = Tensor::scalar(3.5);
    EXPECT_EQ(s.order(), 0u);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], 3.5);
}

TEST(Tensor, RejectsDataLengthMismatch) { EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError); }

TEST(Tensor, LittleEndianLinearIndexExhaustive) {
    const Shape shape{3, 2, 4, 2};
    Tensor t(shape);
    std::size_t expected = 0;
    // i1 fastest: nest the loops with i4 outermost.
    for (std::size_t i4 = 0; i4 < 2; ++i4)
        for (std::size_t i3 = 0; i3 < 4; ++i3)
            for (std::size_t i2 = 0; i2 < 2; ++i2)
                for (std::size_t i1 = 0; i1 < 3; ++i1) {
                    const Shape idx{i1, i2, i3, i4};
                    const std::size_t lin = t.linear_index(idx);
                    EXPECT_EQ(lin, i1 + 3 * i2 + 6 * i3 + 24 * i4);
                    EXPECT_EQ(lin, expected++);
                    EXPECT_EQ(t.multi_index(lin), idx);
                }
}

TEST(Kronecker, ScalarIdentity) {
    Rng rng(1);
    Tensor b = random_uniform({3, 2}, rng);
    Tensor one({1, 1}, 1.0);
    EXPECT_EQ(kronecker(one, b), b);
    EXPECT_EQ(kronecker(Tensor::scalar(1.0), Tensor::scalar(4.0))[0], 4.0);
}

TEST(Kronecker, ShapeArithmetic) {
    Tensor c = kronecker(Tensor({2, 3}), Tensor({4, 5}));
    EXPECT_EQ(c.shape(), (Shape{8, 15}));
}

TEST(Kronecker, HandExample) {
    const Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
    const Tensor b = Tensor::from_rows({{0, 1}, {1, 0}});
    const Tensor expected = Tensor::from_rows({{0, 1, 0, 2}, {1, 0, 2, 0}, {0, 3, 0, 4}, {3, 0, 4, 0}});
    EXPECT_EQ(kronecker(a, b), expected);
}

TEST(Kronecker, MatchesIndexFormulaOnOrder3) {
    Rng rng(7);
    Tensor a = random_uniform({2, 3, 2}, rng), b = random_uniform({3, 1, 2}, rng);
    Tensor c = kronecker(a, b);
    Shape ia(3, 0);
    do {
        Shape ib(3, 0);
        do {
            const Shape ic{ia[0] * 3 + ib[0], ia[1] * 1 + ib[1], ia[2] * 2 + ib[2]};
            EXPECT_EQ(c.at(ic), a.at(ia) * b.at(ib));
        } while (oracle::next_index(ib, b.shape()));
    } while (oracle::next_index(ia, a.shape()));
}

TEST(Kronecker, OrderMismatchNamesBothOrders) {
    try {
        kronecker(Tensor({2, 2}), Tensor({2, 2, 2}));
        FAIL();
    } catch (const ShapeError &e) {
        EXPECT_NE(std::string(e.what()).find("2 and 3"), std::string::npos);
    }
}

TEST(Kronecker, MatrixCaseEqualsClassicalProduct) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor a = random_uniform(random_shape(rng, 2, 4), rng), b = random_uniform(random_shape(rng, 2, 4), rng);
        Tensor k = matricize(kronecker(a, b), 1);
        for (std::size_t i = 0; i < a.dim(0); ++i)
            for (std::size_t j = 0; j < a.dim(1); ++j)
                for (std::size_t p = 0; p < b.dim(0); ++p)
                    for (std::size_t q = 0; q < b.dim(1); ++q)
                        EXPECT_EQ(k(i * b.dim(0) + p, j * b.dim(1) + q), a(i, j) * b(p, q));
    }
}

TEST(Matricize, Order2Mode1IsIdentity) {
    Rng rng(2);
    Tensor m = random_uniform({3, 5}, rng);
    EXPECT_EQ(matricize(m, 1), m);
}

TEST(Matricize, Mode2Of2x2x2HandRows) {
    std::vector<double> d(8);
    std::iota(d.begin(), d.end(), 0.0);
    Tensor x({2, 2, 2}, d);
    EXPECT_EQ(matricize(x, 2), Tensor::from_rows({{0, 1, 4, 5}, {2, 3, 6, 7}}));
}

TEST(Matricize, EntryFormula) {
    Rng rng(9);
    Tensor x = random_uniform({2, 3, 4, 2}, rng);
    for (std::size_t n = 1; n <= 4; ++n) {
        Tensor m = matricize(x, n);
        Shape idx(4, 0);
        do {
            std::size_t col = 0, stride = 1;
            for (std::size_t k = 0; k < 4; ++k) {
                if (k == n - 1) continue;
                col += idx[k] * stride;
                stride *= x.dim(k);
            }
            EXPECT_EQ(m(idx[n - 1], col), x.at(idx));
        } while (oracle::next_index(idx, x.shape()));
    }
}

TEST(Matricize, ModeOutOfRange) {
    EXPECT_THROW(matricize(Tensor({2, 2}), 0), ShapeError);
    EXPECT_THROW(matricize(Tensor({2, 2}), 3), ShapeError);
}

TEST(Tensorize, RoundTripEveryModeUpToOrder5) {
    Rng rng(11);
    for (std::size_t order = 1; order <= 5; ++order)
        for (int trial = 0; trial < 10; ++trial) {
            Tensor x = random_uniform(random_shape(rng, order, 4), rng);
            for (std::size_t n = 1; n <= order; ++n) {
                Tensor m = matricize(x, n);
                EXPECT_EQ(tensorize(m, x.shape(), n), x);
                EXPECT_EQ(matricize(tensorize(m, x.shape(), n), n), m);
            }
        }
}

TEST(Tensorize, ReshapeForMultilinearFilter) {
    Tensor m({6, 6});
    EXPECT_EQ(tensorize(m, Shape{2, 3, 2, 3}).shape(), (Shape{2, 3, 2, 3}));
}

TEST(Tensorize, RandomMatrixRoundTripBitExact) {
    Rng rng(5);
    Tensor m = random_uniform({4, 6}, rng);
    const Shape target{4, 2, 3};
    EXPECT_EQ(matricize(tensorize(m, target, 1), 1), m);
}

TEST(Tensorize, ElementCountMismatch) {
    EXPECT_THROW(tensorize(Tensor({4, 6}), Shape{4, 5}, 1), ShapeError);
    EXPECT_THROW(tensorize(Tensor({4, 6}), Shape{5, 5}), ShapeError);
}

TEST(Contract, SinglePairResultShape) {
    Tensor a({2, 3, 4, 2}), b({4, 3, 2, 5});
    Tensor c = contract(a, b, {{3, 1}});
    EXPECT_EQ(c.shape(), (Shape{2, 3, 2, 3, 2, 5}));
}

TEST(Contract, IdentityOverAnyMode) {
    Rng rng(4);
    Tensor x = random_uniform({3, 4, 2}, rng);
    for (std::size_t n = 1; n <= 3; ++n) {
        Tensor c = contract(x, Tensor::identity(x.dim(n - 1)), {{n, 1}});
        // x's other modes come first, then the identity's free mode.
        std::vector<std::size_t> perm;
        for (std::size_t k = 0; k < 3; ++k)
            if (k != n - 1) perm.push_back(k);
        perm.push_back(n - 1);
        EXPECT_EQ(c, permute(x, perm));
    }
}

TEST(Contract, ThreeByFourByTwoAgainstLoops) {
    Rng rng(21);
    Tensor a = random_uniform({3, 4, 2}, rng), b = random_uniform({2, 5}, rng);
    Tensor c = contract(a, b, {{3, 1}});
    EXPECT_EQ(c.shape(), (Shape{3, 4, 5}));
    EXPECT_LE(max_abs_diff(c, oracle::contract_loops(a, b, {{3, 1}})), 1e-12);
}

TEST(Contract, MultiPairAgainstLoops) {
    Rng rng(22);
    Tensor f = random_uniform({2, 3, 2, 3}, rng), y = random_uniform({2, 4, 3}, rng);
    const ModeSpec spec{{3, 1}, {4, 3}};
    Tensor c = contract(f, y, spec);
    EXPECT_EQ(c.shape(), (Shape{2, 3, 4}));
    EXPECT_LE(max_abs_diff(c, oracle::contract_loops(f, y, spec)), 1e-12);
}

TEST(Contract, Errors) {
    EXPECT_THROW(contract(Tensor({2, 3}), Tensor({4, 2}), {{2, 1}}), ShapeError);
    EXPECT_THROW(contract(Tensor({2, 2}), Tensor({2, 2}), {{1, 1}, {1, 2}}), ShapeError);
    EXPECT_THROW(contract(Tensor({2, 2}), Tensor({2, 2}), {{3, 1}}), ShapeError);
}

TEST(Contract, RandomInstancesMatchLoops) {
    Rng rng(99);
    std::uniform_int_distribution<std::size_t> ord(1, 4), npairs(0, 2);
    for (int trial = 0; trial < 60; ++trial) {
        Tensor a = random_uniform(random_shape(rng, ord(rng), 4), rng);
        Shape bs = random_shape(rng, ord(rng), 4);
        ModeSpec spec;
        std::vector<std::size_t> ma(a.order()), mb(bs.size());
        std::iota(ma.begin(), ma.end(), 1);
        std::iota(mb.begin(), mb.end(), 1);
        std::shuffle(ma.begin(), ma.end(), rng);
        std::shuffle(mb.begin(), mb.end(), rng);
        const std::size_t p = std::min({npairs(rng), ma.size(), mb.size()});
        for (std::size_t k = 0; k < p; ++k) {
            bs[mb[k] - 1] = a.dim(ma[k] - 1);
            spec.pairs.emplace_back(ma[k], mb[k]);
        }
        Tensor b = random_uniform(bs, rng);
        EXPECT_LE(max_abs_diff(contract(a, b, spec), oracle::contract_loops(a, b, spec)), 1e-12);
    }
}

TEST(ModeProduct, MatchesContractThenPermute) {
    Rng rng(31);
    Tensor x = random_uniform({3, 4, 5, 2}, rng);
    for (std::size_t n = 1; n <= 4; ++n) {
        Tensor m = random_uniform({6, x.dim(n - 1)}, rng);
        Tensor y = mode_product(x, m, n);
        // contract gives (other modes of x..., rows of m)
        Tensor c = contract(x, m, {{n, 2}});
        std::vector<std::size_t> perm;
        for (std::size_t k = 0, other = 0; k < 4; ++k) perm.push_back(k == n - 1 ? 3 : other++);
        EXPECT_LE(max_abs_diff(y, permute(c, perm)), 1e-12);
    }
}

TEST(ModeGram, EqualsMatricizedProduct) {
    Rng rng(32);
    Tensor a = random_uniform({3, 4, 2}, rng), b = random_uniform({3, 5, 2}, rng);
    Tensor g = mode_gram(a, b, 2);
    Tensor ref = matmul(matricize(a, 2), transpose(matricize(b, 2)));
    EXPECT_LE(max_abs_diff(g, ref), 1e-12);
}

TEST(TensorIo, TextAndBinaryRoundTrip) {
    Rng rng(8);
    Tensor x = random_normal({3, 1, 4}, rng);
    for (bool binary : {false, true}) {
        std::stringstream ss;
        binary ? write_tensor_binary(ss, x) : write_tensor_text(ss, x);
        EXPECT_EQ(read_tensor(ss), x);
    }
}

TEST(TensorIo, RejectsGarbage) {
    std::stringstream ss("hello world");
    EXPECT_THROW(read_tensor(ss), DataError);
    std::stringstream truncated("mgtn-tensor 1\norder 1\nshape 3\n1\n2\n");
    EXPECT_THROW(read_tensor(truncated), DataError);
}
