#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>

#include "mgtn/nn/model.hpp"
#include "mgtn/nn/optim.hpp"
#include "mgtn/nn/param_count.hpp"
#include "mgtn/nn/trainer.hpp"
#include "support/nn_oracles.hpp"

using namespace mgtn;
using namespace mgtn::nn;

namespace {

AdjacencyMatrix random_graph(std::size_t n, Rng &rng, bool directed = false) {
    AdjacencyMatrix g;
    g.a = random_uniform({n, n}, rng, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) g.a(i, i) = 0.0;
    if (!directed)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) g.a(i, j) = g.a(j, i);
    g.directed = directed;
    return degree_and_normalize(g);
}

AdjacencyMatrix zero_graph(std::size_t n) {
    AdjacencyMatrix g;
    g.a = Tensor({n, n});
    return g;
}

LayerSpec spec(LayerKind k, std::size_t units, Activation act = Activation::Linear) {
    LayerSpec s;
    s.kind = k;
    s.units = units;
    s.activation = act;
    return s;
}

Shape batched(Shape s, std::size_t b) {
    s.push_back(b);
    return s;
}

void randomize_betas(Model &m, Rng &rng) {
    for (auto *p : m.parameters())
        if (p->name.find("beta") != std::string::npos) p->value[0] = random_uniform({1}, rng, 0.2, 0.9)[0];
}

} // namespace

// ---------------------------------------------------------------------------
// Forward semantics

TEST(FMGTN, AllBetasZeroIsFeatureTransform) {
    Rng rng(1);
    std::vector<AdjacencyMatrix> graphs{random_graph(5, rng), random_graph(3, rng)};
    LayerSpec s = spec(LayerKind::FMGTN, 6, Activation::Tanh);
    s.beta_init = 0.0;
    Model m({4, 5, 3}, {s}, graphs, rng);
    const Tensor x = random_normal({4, 5, 3, 2}, rng);
    Tensor expect = mode_product(x, m.find("0.fmgtn.W")->value, 1);
    activate_inplace(expect, Activation::Tanh);
    EXPECT_LE(max_abs_diff(m.forward(x), expect), 1e-14);
}

TEST(FMGTN, TradingShape) {
    Rng rng(2);
    Model m({4, 30, 9}, {spec(LayerKind::FMGTN, 16, Activation::Relu)}, {random_graph(30, rng), random_graph(9, rng)},
            rng);
    EXPECT_EQ(m.output_shape(), (Shape{16, 30, 9}));
    EXPECT_EQ(m.forward(random_normal({4, 30, 9, 3}, rng)).shape(), (Shape{16, 30, 9, 3}));
}

TEST(FMGTN, MatchesMatricizedOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t j0 = 1 + rng() % 4, j1 = 1 + rng() % 4, i1 = 2 + rng() % 4, i2 = 2 + rng() % 4;
        std::vector<AdjacencyMatrix> graphs{random_graph(i1, rng, trial % 2 == 0), random_graph(i2, rng)};
        Model m({j0, i1, i2}, {spec(LayerKind::FMGTN, j1)}, graphs, rng);
        randomize_betas(m, rng);
        const auto &layer = static_cast<const FMGTNLayer &>(m.layer(0));
        const Tensor x = random_normal({j0, i1, i2, 3}, rng);
        const Tensor y = m.forward(x);
        for (std::size_t b = 0; b < 3; ++b) {
            const Tensor ref = oracle::fmgtn_matricized(oracle::sample(x, b), m.find("0.fmgtn.W")->value,
                                                        {graphs[0].a, graphs[1].a}, {layer.beta(0), layer.beta(1)});
            EXPECT_LE(max_abs_diff(oracle::sample(y, b), ref), 1e-10);
        }
    }
}

TEST(FMGTN, FilterOrderInvariance) {
    Rng rng(4);
    for (std::size_t nm = 2; nm <= 3; ++nm) {
        Shape in{3};
        std::vector<AdjacencyMatrix> graphs;
        for (std::size_t m = 0; m < nm; ++m) {
            in.push_back(2 + m);
            graphs.push_back(random_graph(2 + m, rng, m == 0));
        }
        Model model(in, {spec(LayerKind::FMGTN, 4)}, graphs, rng);
        randomize_betas(model, rng);
        const auto &layer = static_cast<const FMGTNLayer &>(model.layer(0));
        const Tensor x = random_normal(batched(in, 2), rng);
        Tensor z = mode_product(x, model.find("0.fmgtn.W")->value, 1);
        for (std::size_t m = nm; m-- > 0;) z.add_scaled(mode_product(z, graphs[m].a, m + 2), layer.beta(m));
        EXPECT_LE(max_abs_diff(model.forward(x), z), 1e-12);
    }
}

TEST(FMGTN, ReproducesSingleGraphShift) {
    Rng rng(5);
    TimeGraphOptions opts;
    const AdjacencyMatrix g = build_time_graph(7, opts);
    LayerSpec s = spec(LayerKind::FMGTN, 3, Activation::Tanh);
    s.beta_init = 1.0;
    s.train_beta = false;
    Model m({2, 7}, {s}, {g}, rng);
    const Tensor x = random_normal({2, 7, 4}, rng);
    const Tensor y = m.forward(x);
    for (std::size_t b = 0; b < 4; ++b) {
        const Tensor h = matmul(m.find("0.fmgtn.W")->value, oracle::sample(x, b));
        Tensor ref = transpose(graph_shift(g, transpose(h)));
        activate_inplace(ref, Activation::Tanh);
        EXPECT_LE(max_abs_diff(oracle::sample(y, b), ref), 1e-12);
    }
}

TEST(FMGTN, GraphSizeMismatchNamesMode) {
    Rng rng(6);
    try {
        Model m({4, 5, 3}, {spec(LayerKind::FMGTN, 2)}, {random_graph(5, rng), random_graph(4, rng)}, rng);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError &e) {
        EXPECT_NE(std::string(e.what()).find("mode 3"), std::string::npos) << e.what();
    }
}

TEST(GMGTN, MatchesOrder4FilterOracle) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t nm = 1 + trial % 3;
        Shape in{1 + rng() % 3};
        std::vector<AdjacencyMatrix> graphs;
        std::vector<Tensor> adj;
        LayerSpec s = spec(LayerKind::GMGTN, 0);
        for (std::size_t m = 0; m < nm; ++m) {
            in.push_back(2 + rng() % 3);
            graphs.push_back(random_graph(in.back(), rng, m == 1));
            adj.push_back(graphs.back().a);
            s.feature_dims.push_back(1 + rng() % 3);
        }
        Model model(in, {s}, graphs, rng);
        randomize_betas(model, rng);
        std::vector<Tensor> w, p;
        std::vector<double> beta;
        for (std::size_t m = 0; m < nm; ++m) {
            const std::string k = std::to_string(m + 1);
            w.push_back(model.find("0.gmgtn.W" + k)->value);
            p.push_back(random_normal(model.find("0.gmgtn.P" + k)->value.shape(), rng));
            model.find("0.gmgtn.P" + k)->value = p.back();
            beta.push_back(model.find("0.gmgtn.beta" + k)->value[0]);
        }
        const Tensor x = random_normal(batched(in, 2), rng);
        const Tensor y = model.forward(x);
        Shape out = in;
        out[0] = s.feature_dims.back();
        EXPECT_EQ(y.shape(), batched(out, 2));
        for (std::size_t b = 0; b < 2; ++b)
            EXPECT_LE(max_abs_diff(oracle::sample(y, b), oracle::gmgtn_filters(oracle::sample(x, b), w, p, adj, beta)),
                      1e-10);
    }
}

TEST(GMGTN, ReducesToFMGTN) {
    Rng rng(8);
    for (std::size_t nm = 1; nm <= 3; ++nm) {
        for (int trial = 0; trial < 5; ++trial) {
            Shape in{2 + rng() % 3};
            std::vector<AdjacencyMatrix> graphs;
            for (std::size_t m = 0; m < nm; ++m) {
                in.push_back(2 + rng() % 3);
                graphs.push_back(random_graph(in.back(), rng, trial % 2 == 1));
            }
            const std::size_t j1 = 1 + rng() % 4;
            Model f(in, {spec(LayerKind::FMGTN, j1, Activation::Tanh)}, graphs, rng);
            Model g(in, {spec(LayerKind::GMGTN, j1, Activation::Tanh)}, graphs, rng);
            randomize_betas(f, rng);
            for (std::size_t m = 0; m < nm; ++m) {
                const std::string k = std::to_string(m + 1);
                g.find("0.gmgtn.P" + k)->value = Tensor::identity(j1);
                g.find("0.gmgtn.W" + k)->value = m == 0 ? f.find("0.fmgtn.W")->value : Tensor::identity(j1);
                g.find("0.gmgtn.beta" + k)->value = f.find("0.fmgtn.beta" + k)->value;
            }
            const Tensor x = random_normal(batched(in, 3), rng);
            EXPECT_LE(max_abs_diff(f.forward(x), g.forward(x)), 1e-10) << "M=" << nm;
        }
    }
}

TEST(GMGTN, ZeroGraphsIdentityWeights) {
    Rng rng(9);
    Model m({3, 4, 2}, {spec(LayerKind::GMGTN, 3, Activation::Sigmoid)}, {zero_graph(4), zero_graph(2)}, rng);
    for (const char *k : {"1", "2"}) m.find(std::string("0.gmgtn.W") + k)->value = Tensor::identity(3);
    const Tensor x = random_normal({3, 4, 2, 2}, rng);
    Tensor expect = x;
    activate_inplace(expect, Activation::Sigmoid);
    EXPECT_LE(max_abs_diff(m.forward(x), expect), 1e-15);
}

TEST(Dense, IdentityWeights) {
    Rng rng(10);
    Model m({4}, {spec(LayerKind::Dense, 4)}, {}, rng);
    m.find("0.dense.W")->value = Tensor::identity(4);
    const Tensor x = random_normal({4, 3}, rng);
    EXPECT_EQ(m.forward(x), x);
}

TEST(Dense, FlattensSamples) {
    Rng rng(11);
    Model m({2, 3}, {spec(LayerKind::Dense, 2)}, {}, rng);
    EXPECT_EQ(m.find("0.dense.W")->value.shape(), (Shape{2, 6}));
    EXPECT_EQ(m.forward(random_normal({2, 3, 5}, rng)).shape(), (Shape{2, 5}));
}

TEST(TTDense, MatchesReconstructedDense) {
    Rng rng(12);
    LayerSpec s = spec(LayerKind::TTDense, 27, Activation::Tanh);
    s.ranks = {1, 2, 2, 1};
    Model m({4, 5, 3}, {s}, {}, rng);
    auto &layer = static_cast<TTDenseLayer &>(m.layer(0));
    EXPECT_EQ(layer.spec().output_modes, (Shape{3, 3, 3}));
    Parameter *bias = m.find("0.tt_dense.b");
    bias->value = random_normal({27}, rng);
    const Tensor dense = tt_matrix_to_dense(layer.matrix());
    const Tensor x = random_normal({4, 5, 3, 6}, rng);
    Tensor ref = matmul(dense, x.reshaped({60, 6}));
    for (std::size_t b = 0; b < 6; ++b)
        for (std::size_t u = 0; u < 27; ++u) ref(u, b) += bias->value[u];
    activate_inplace(ref, Activation::Tanh);
    EXPECT_LE(max_abs_diff(m.forward(x), ref), 1e-10);
}

TEST(TTDense, RankTupleMustMatchFactorization) {
    Rng rng(13);
    LayerSpec s = spec(LayerKind::TTDense, 8);
    s.ranks = {1, 2, 1};
    EXPECT_THROW(Model({4, 5, 3}, {s}, {}, rng), ShapeError);
    s.input_modes = {20, 3};
    EXPECT_NO_THROW(Model({4, 5, 3}, {s}, {}, rng));
}

TEST(GCN, MatchesLoopOracle) {
    Rng rng(14);
    const AdjacencyMatrix g = random_graph(5, rng);
    LayerSpec s = spec(LayerKind::GCN, 3, Activation::Relu);
    s.graph_mode = 1;
    Model m({2, 5}, {s}, {g}, rng);
    m.find("0.gcn.b")->value = random_normal({3}, rng);
    const Tensor w = m.find("0.gcn.W")->value, bias = m.find("0.gcn.b")->value;
    // renormalised support computed directly
    Tensor sup({5, 5});
    std::vector<double> deg(5, 0.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) deg[i] += g.a(i, j) + (i == j);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) sup(i, j) = (g.a(i, j) + (i == j)) / std::sqrt(deg[i] * deg[j]);
    const Tensor x = random_normal({2, 5, 3}, rng);
    const Tensor y = m.forward(x);
    EXPECT_EQ(y.shape(), (Shape{5, 3, 3}));
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t u = 0; u < 3; ++u) {
                double acc = bias[u];
                for (std::size_t k = 0; k < 5; ++k)
                    for (std::size_t f = 0; f < 2; ++f) acc += sup(i, k) * x(f, k, b) * w(f, u);
                EXPECT_NEAR(y(i, u, b), std::max(acc, 0.0), 1e-12);
            }
}

// ---------------------------------------------------------------------------
// Gradients

TEST(Backward, FiniteDifferencesAllLayers) {
    Rng rng(15);
    std::vector<AdjacencyMatrix> graphs{random_graph(4, rng, true), random_graph(3, rng)};
    LayerSpec tt = spec(LayerKind::TTDense, 6, Activation::Tanh);
    tt.ranks = {1, 2, 2, 1};
    LayerSpec gm = spec(LayerKind::GMGTN, 0, Activation::Tanh);
    gm.feature_dims = {2, 3};
    Model m({3, 4, 3},
            {spec(LayerKind::FMGTN, 2, Activation::Tanh), gm, tt, spec(LayerKind::Dense, 2, Activation::Sigmoid)},
            graphs, rng);
    randomize_betas(m, rng);
    const Tensor x = random_normal({3, 4, 3, 4}, rng);
    const Tensor y = random_normal({2, 4}, rng);
    std::string worst;
    EXPECT_LT(oracle::finite_difference_error(m, x, y, 1e-5, &worst), 1e-4) << worst;
}

TEST(Backward, FiniteDifferencesGCNAndInputGradient) {
    Rng rng(16);
    Model m({2, 5}, {spec(LayerKind::GCN, 3, Activation::Tanh), spec(LayerKind::Dense, 1)}, {random_graph(5, rng)}, rng);
    const Tensor x = random_normal({2, 5, 3}, rng);
    const Tensor y = random_normal({1, 3}, rng);
    EXPECT_LT(oracle::finite_difference_error(m, x, y, 1e-5), 1e-4);

    m.zero_grad();
    const Tensor dx = m.backward(mse_loss(m.forward(x), y).grad);
    Tensor xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + 1e-5;
        const double up = mse(m.forward(xp), y);
        xp[i] = x[i] - 1e-5;
        const double down = mse(m.forward(xp), y);
        xp[i] = x[i];
        EXPECT_NEAR(dx[i], (up - down) / 2e-5, 1e-7);
    }
}

TEST(Backward, ZeroLossGivesZeroGradients) {
    Rng rng(17);
    Model m({2, 3}, {spec(LayerKind::FMGTN, 2, Activation::Tanh)}, {random_graph(3, rng)}, rng);
    const Tensor x = random_normal({2, 3, 2}, rng);
    const Tensor y = m.forward(x);
    m.zero_grad();
    m.backward(mse_loss(m.forward(x), y).grad);
    for (auto *p : m.parameters())
        for (double g : p->grad.data()) EXPECT_EQ(g, 0.0) << p->name;
}

TEST(Backward, BetaGradientZeroWithoutEdges) {
    Rng rng(18);
    Model f({2, 3, 4}, {spec(LayerKind::FMGTN, 2, Activation::Tanh)}, {zero_graph(3), zero_graph(4)}, rng);
    Model g({2, 3, 4}, {spec(LayerKind::GMGTN, 2, Activation::Tanh)}, {zero_graph(3), zero_graph(4)}, rng);
    const Tensor x = random_normal({2, 3, 4, 2}, rng);
    const Tensor y = random_normal({2, 3, 4, 2}, rng);
    for (Model *m : {&f, &g}) {
        m->zero_grad();
        m->backward(mse_loss(m->forward(x), y).grad);
        for (auto *p : m->parameters())
            if (p->name.find("beta") != std::string::npos) EXPECT_EQ(p->grad[0], 0.0) << p->name;
    }
}

TEST(Backward, NonFiniteLossReportsBatch) {
    Rng rng(19);
    Model m({3}, {spec(LayerKind::Dense, 1)}, {}, rng);
    Tensor x = random_normal({3, 8}, rng);
    x(1, 5) = std::numeric_limits<double>::quiet_NaN();
    const Tensor y({1, 8});
    Adam opt(1e-3);
    Rng shuf(0);
    try {
        fit(m, opt, x, y, {1, 2, false}, shuf);
        FAIL() << "expected NumericError";
    } catch (const NumericError &e) {
        EXPECT_NE(std::string(e.what()).find("batch 2"), std::string::npos) << e.what();
    }
}

// ---------------------------------------------------------------------------
// Optimizers and training

TEST(Optim, AdamFirstStep) {
    Parameter p("w", Tensor::vector({1.0}));
    p.grad[0] = 1.0;
    Adam opt(0.1);
    opt.step({&p});
    EXPECT_NEAR(p.value[0], 0.9, 1e-8);
}

TEST(Optim, ZeroGradientLeavesParameters) {
    for (const char *name : {"adam", "rmsprop", "sgd"}) {
        Parameter p("w", Tensor::vector({1.5, -2.0}));
        auto opt = make_optimizer(name, 1e-2);
        for (int i = 0; i < 3; ++i) opt->step({&p});
        EXPECT_EQ(p.value, Tensor::vector({1.5, -2.0})) << name;
    }
}

TEST(Optim, FrozenParameterUntouched) {
    Parameter p("w", Tensor::vector({1.0}), false);
    p.grad[0] = 3.0;
    RMSProp opt(1e-2);
    opt.step({&p});
    EXPECT_EQ(p.value[0], 1.0);
}

TEST(Optim, RMSPropFirstStep) {
    Parameter p("w", Tensor::vector({1.0}));
    p.grad[0] = 2.0;
    RMSProp opt(1e-2);
    opt.step({&p});
    EXPECT_NEAR(p.value[0], 1.0 - 1e-2 * 2.0 / (std::sqrt(0.1 * 4.0) + 1e-7), 1e-15);
}

TEST(Optim, RejectsNonPositiveRate) {
    EXPECT_THROW(Adam(0.0), ConfigError);
    EXPECT_THROW(RMSProp(-1.0), ConfigError);
    EXPECT_THROW(make_optimizer("lbfgs", 1e-3), ConfigError);
}

TEST(Training, LossNonIncreasingSmallRate) {
    Rng rng(20);
    LayerSpec tt = spec(LayerKind::TTDense, 4, Activation::Relu);
    tt.ranks = {1, 2, 2, 1};
    Model m({3, 5, 4}, {spec(LayerKind::FMGTN, 4, Activation::Relu), tt, spec(LayerKind::Dense, 2)},
            {random_graph(5, rng), random_graph(4, rng)}, rng);
    const Tensor x = random_normal({3, 5, 4, 16}, rng);
    const Tensor y = random_normal({2, 16}, rng);
    Adam opt(1e-3);
    double prev = train_step(m, opt, x, y);
    for (int s = 1; s < 20; ++s) {
        const double cur = train_step(m, opt, x, y);
        EXPECT_LE(cur, prev + 1e-12) << "step " << s;
        prev = cur;
    }
}

TEST(Training, FitIsDeterministic) {
    auto run = [] {
        Rng rng(21);
        Model m({2, 4}, {spec(LayerKind::FMGTN, 3, Activation::Tanh), spec(LayerKind::Dense, 1)},
                {random_graph(4, rng)}, rng);
        const Tensor x = random_normal({2, 4, 20}, rng);
        const Tensor y = random_normal({1, 20}, rng);
        Adam opt(1e-2);
        Rng shuf(99);
        return fit(m, opt, x, y, {3, 6, true}, shuf, &x, &y).back().val_loss.value();
    };
    EXPECT_EQ(run(), run());
}

// ---------------------------------------------------------------------------
// Parameter counts and checkpoints

TEST(ParamCount, FmgtnClosedForm) {
    Rng rng(22);
    Model m({4, 30, 9}, {spec(LayerKind::FMGTN, 16)}, {random_graph(30, rng), random_graph(9, rng)}, rng);
    EXPECT_EQ(m.param_count(), 66u);
    EXPECT_EQ(fmgtn_param_count(4, 16, 2), 66u);
}

TEST(ParamCount, GmgtnClosedForm) {
    Rng rng(23);
    LayerSpec s = spec(LayerKind::GMGTN, 0);
    s.feature_dims = {5, 6};
    Model m({3, 4, 2}, {s}, {random_graph(4, rng), random_graph(2, rng)}, rng);
    EXPECT_EQ(m.param_count(), gmgtn_param_count({3, 5, 6}));
    EXPECT_EQ(gmgtn_param_count({3, 5, 6}), (5u * 3 + 25 + 1) + (6u * 5 + 36 + 1));
    // equal widths: M (J^2 + J^2) + M
    EXPECT_EQ(gmgtn_param_count({4, 4, 4, 4}), 3u * (16 + 16) + 3);
}

TEST(ParamCount, FmgtnSmallerThanMatricizedDense) {
    for (std::size_t i = 2; i <= 6; ++i)
        for (std::size_t nm = 2; nm <= 4; ++nm)
            for (std::size_t j = 1; j <= 16; j *= 2) {
                const Shape sizes(nm, i);
                EXPECT_LT(fmgtn_param_count(j, j, nm), matricized_dense_param_count(j, j, sizes, 1));
            }
}

TEST(ParamCount, TradingConfigByHand) {
    Rng rng(24);
    LayerSpec tt = spec(LayerKind::TTDense, 27, Activation::Relu);
    tt.ranks = {1, 2, 2, 1};
    Model m({4, 30, 9}, {spec(LayerKind::FMGTN, 16, Activation::Relu), tt, spec(LayerKind::Dense, 2)},
            {random_graph(30, rng), random_graph(9, rng)}, rng);
    // fMGTN 16*4+2, TT cores 1*16*3*2 + 2*30*3*2 + 2*9*3*1 plus 27 biases, dense 27*2+2
    EXPECT_EQ(layer_param_counts(m), (std::vector<std::size_t>{66, 510 + 27, 56}));
    EXPECT_EQ(m.param_count(), 659u);
}

TEST(ParamCount, UniqueNames) {
    Rng rng(25);
    LayerSpec tt = spec(LayerKind::TTDense, 4);
    tt.ranks = {1, 2, 2, 1};
    Model m({2, 3, 4}, {spec(LayerKind::GMGTN, 2), tt, spec(LayerKind::Dense, 2)},
            {random_graph(3, rng), random_graph(4, rng)}, rng);
    std::set<std::string> names;
    for (auto *p : m.parameters()) EXPECT_TRUE(names.insert(p->name).second) << p->name;
}

TEST(Checkpoint, RoundTripExact) {
    Rng rng(26);
    LayerSpec tt = spec(LayerKind::TTDense, 6, Activation::Relu);
    tt.ranks = {1, 3, 2, 1};
    LayerSpec fm = spec(LayerKind::FMGTN, 3, Activation::Tanh);
    fm.train_beta = false;
    Model m({2, 5, 3}, {fm, tt, spec(LayerKind::Dense, 2)}, {random_graph(5, rng, true), random_graph(3, rng)}, rng);
    randomize_betas(m, rng);
    const auto path = std::filesystem::temp_directory_path() / "mgtn_ckpt_test.json";
    save_checkpoint(path.string(), m);
    Model back = load_checkpoint(path.string());
    std::filesystem::remove(path);
    const Tensor x = random_normal({2, 5, 3, 4}, rng);
    EXPECT_EQ(back.forward(x), m.forward(x));
    EXPECT_FALSE(back.find("0.fmgtn.beta1")->trainable);
    EXPECT_EQ(back.param_count(), m.param_count());
    EXPECT_TRUE(back.graphs()[0].directed);
}

TEST(Checkpoint, RejectsForeignFile) {
    EXPECT_THROW(model_from_checkpoint_json(nlohmann::json{{"format", "other"}}), DataError);
}

TEST(Model, CopyIsIndependent) {
    Rng rng(27);
    Model m({3}, {spec(LayerKind::Dense, 2)}, {}, rng);
    Model c = m;
    c.find("0.dense.W")->value.fill(0.0);
    EXPECT_NE(m.find("0.dense.W")->value, c.find("0.dense.W")->value);
}
