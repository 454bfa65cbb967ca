#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mgtn/trade/dqn.hpp"
#include "mgtn/trade/env.hpp"
#include "mgtn/trade/metrics.hpp"
#include "mgtn/trade/replay.hpp"
#include "support/toy_env.hpp"

using namespace mgtn;
using namespace mgtn::trade;

namespace {

data::SampleSet flat_samples(std::size_t n, std::size_t currencies = 2) {
    data::SampleSet s;
    s.inputs = Tensor({1, 3, currencies, n});
    s.targets = Tensor({currencies, n});
    return s;
}

double brute_force_drawdown(const std::vector<double> &e) {
    double worst = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = i + 1; j < e.size(); ++j) worst = std::max(worst, (e[i] - e[j]) / e[i]);
    return worst * 100.0;
}

nn::Model toy_q(Rng &rng) {
    nn::LayerSpec s;
    s.kind = nn::LayerKind::Dense;
    s.units = 2;
    return nn::Model({2}, {s}, {}, rng);
}

} // namespace

// ---------------------------------------------------------------------------
// Environment

TEST(MarketEnv, RewardSignConvention) {
    data::SampleSet s = flat_samples(3);
    s.targets(0, 0) = 0.0;
    s.targets(0, 1) = 0.001;
    s.targets(0, 2) = 0.001;
    MarketEnv env = MarketEnv::from_targets(s, 0);
    env.reset();
    EXPECT_EQ(env.step(Buy).reward, 0.0);
    EXPECT_EQ(env.step(Buy).reward, 0.001);
    const StepResult last = env.step(Sell);
    EXPECT_EQ(last.reward, -0.001);
    EXPECT_TRUE(last.done);
    EXPECT_THROW(env.step(Buy), Error);
}

TEST(MarketEnv, AccountingMatchesEquityOracle) {
    Rng rng(1);
    const std::size_t n = 200;
    data::SampleSet s = flat_samples(n);
    std::normal_distribution<double> g(0.0, 1e-3);
    for (std::size_t t = 0; t < n; ++t) s.targets(1, t) = g(rng);
    MarketEnv env = MarketEnv::from_targets(s, 1);
    std::bernoulli_distribution coin(0.5);
    std::vector<int> actions;
    std::vector<double> rewards;
    env.reset();
    for (std::size_t t = 0; t < n; ++t) {
        actions.push_back(coin(rng) ? Buy : Sell);
        rewards.push_back(env.step(actions.back()).reward);
    }
    // account value compounding a +/-1 position over each step's gross return
    double value = 1.0, sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double gross = std::exp(s.targets(1, t));
        value *= actions[t] == Buy ? gross : 1.0 / gross;
        sum += position_of(actions[t]) * s.targets(1, t);
    }
    EXPECT_NEAR(std::accumulate(rewards.begin(), rewards.end(), 0.0), sum, 1e-15);
    EXPECT_NEAR(equity_curve(rewards).back(), value, 1e-12);
    EXPECT_NEAR(total_return_pct(rewards), (value - 1.0) * 100.0, 1e-9);
}

TEST(MarketEnv, BuySellAntisymmetric) {
    Rng rng(2);
    const std::size_t n = 50;
    data::SampleSet s = flat_samples(n, 1);
    std::normal_distribution<double> g(0.0, 1e-3);
    for (std::size_t t = 0; t < n; ++t) s.targets(0, t) = g(rng);
    MarketEnv env = MarketEnv::from_targets(s, 0);
    std::vector<int> acts;
    std::bernoulli_distribution coin(0.5);
    for (std::size_t t = 0; t < n; ++t) acts.push_back(coin(rng) ? Buy : Sell);
    std::vector<double> a, b;
    env.reset();
    for (int x : acts) a.push_back(env.step(x).reward);
    env.reset();
    for (int x : acts) b.push_back(env.step(x == Buy ? Sell : Buy).reward);
    for (std::size_t t = 0; t < n; ++t) EXPECT_EQ(a[t], -b[t]);
    EXPECT_LT(total_return_pct(a) * total_return_pct(b), 0.0);
}

TEST(MarketEnv, CostChargedOnPositionChange) {
    data::SampleSet s = flat_samples(3, 1);
    MarketEnv env = MarketEnv::from_targets(s, 0, 1e-4);
    env.reset();
    EXPECT_DOUBLE_EQ(env.step(Buy).reward, -1e-4);
    EXPECT_DOUBLE_EQ(env.step(Buy).reward, 0.0);
    EXPECT_DOUBLE_EQ(env.step(Sell).reward, -2e-4);
}

TEST(MarketEnv, StateIsSampleWindow) {
    data::SampleSet s = flat_samples(4);
    for (std::size_t i = 0; i < s.inputs.size(); ++i) s.inputs[i] = static_cast<double>(i);
    MarketEnv env = MarketEnv::from_targets(s, 0);
    const Tensor s0 = env.reset();
    EXPECT_EQ(s0.shape(), (Shape{1, 3, 2}));
    EXPECT_EQ(s0[0], 0.0);
    EXPECT_EQ(env.step(Buy).state[0], 6.0);
}

// ---------------------------------------------------------------------------
// Metrics

TEST(Metrics, HandCases) {
    EXPECT_DOUBLE_EQ(max_drawdown_pct({100, 110, 99, 120}), 10.0);
    EXPECT_EQ(max_drawdown_pct({1, 2, 3, 4, 5}), 0.0);
    EXPECT_EQ(hit_ratio_pct({0.1, 0.2, 0.3}), 100.0);
    EXPECT_EQ(hit_ratio_pct({0.1, -0.2, 0.0, 0.3}), 50.0);
    EXPECT_EQ(sharpe_ratio({1.0, 2.0, 3.0}).value, 2.0);
    EXPECT_DOUBLE_EQ(total_return_pct({std::log(2.0)}), 100.0);
    const auto flat = sharpe_ratio({0.01, 0.01, 0.01});
    EXPECT_EQ(flat.value, 0.0);
    EXPECT_TRUE(flat.degenerate);
    const FinancialMetrics zero = financial_metrics(std::vector<double>(10, 0.0));
    EXPECT_EQ(zero.tr, 0.0);
    EXPECT_EQ(zero.md, 0.0);
}

TEST(Metrics, DrawdownMatchesBruteForce) {
    Rng rng(3);
    std::normal_distribution<double> g(0.0, 0.02);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> r(5 + rng() % 200);
        for (double &v : r) v = g(rng);
        const auto e = equity_curve(r, 100.0);
        EXPECT_NEAR(max_drawdown_pct(e), brute_force_drawdown(e), 1e-12);
    }
}

// ---------------------------------------------------------------------------
// Replay buffer

TEST(Replay, CapacityAndSampling) {
    ReplayBuffer buf(5);
    Rng rng(4);
    EXPECT_THROW(buf.sample(1, rng), Error);
    for (int i = 0; i < 12; ++i) buf.push({Tensor::scalar(i), 0, static_cast<double>(i), Tensor::scalar(i), false});
    EXPECT_EQ(buf.size(), 5u);
    for (int k = 0; k < 20; ++k)
        for (const auto *t : buf.sample(5, rng)) {
            EXPECT_GE(t->reward, 7.0);
            EXPECT_LE(t->reward, 11.0);
        }
    EXPECT_THROW(buf.sample(6, rng), Error);
}

// ---------------------------------------------------------------------------
// Agent

TEST(Dqn, EpsilonOneIsUniform) {
    Rng rng(5);
    DqnAgent agent(toy_q(rng), {});
    Rng explore(6);
    const int n = 10000;
    int buys = 0;
    for (int i = 0; i < n; ++i) buys += agent.act(oracle::ToyEnv::code(0), 1.0, explore) == Buy;
    EXPECT_LE(std::abs(buys - n / 2), 3.0 * std::sqrt(n * 0.25));
}

TEST(Dqn, EpsilonSchedule) {
    DqnConfig c;
    EXPECT_EQ(linear_epsilon(c, 0, 100), 1.0);
    EXPECT_NEAR(linear_epsilon(c, 25, 100), 0.525, 1e-12);
    EXPECT_EQ(linear_epsilon(c, 50, 100), 0.05);
    EXPECT_EQ(linear_epsilon(c, 99, 100), 0.05);
}

TEST(Dqn, ZeroDiscountRecoversImmediateRewards) {
    Rng rng(7);
    DqnConfig c;
    c.gamma = 0.0;
    c.learning_rate = 1e-2;
    c.batch_size = 32;
    c.episodes = 20;
    c.epsilon_decay_fraction = 0.25;
    c.epsilon_end = 0.0;
    oracle::ToyEnv env(0.5, -0.3, -0.2, 0.8, 200);
    DqnAgent agent(toy_q(rng), c);
    Rng explore(8), replay(9);
    train_dqn(env, agent, explore, replay);
    for (std::size_t s = 0; s < 2; ++s) {
        const auto q = agent.q_values(oracle::ToyEnv::code(s));
        for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(q[a], env.reward(s, a), 1e-2) << s << "," << a;
    }
}

TEST(Dqn, SeededRunIsReproducible) {
    auto run = [] {
        Rng rng(10);
        DqnConfig c;
        c.batch_size = 8;
        c.episodes = 3;
        c.target_sync = 5;
        oracle::ToyEnv env(0.1, 0.0, 0.0, 0.1, 50);
        DqnAgent agent(toy_q(rng), c);
        Rng explore(11), replay(12);
        std::vector<double> out;
        for (const auto &l : train_dqn(env, agent, explore, replay)) {
            out.push_back(l.loss);
            out.push_back(l.metrics.tr);
            out.push_back(l.epsilon);
        }
        return out;
    };
    EXPECT_EQ(run(), run());
}

TEST(Dqn, TargetNetworkLagsUntilSync) {
    Rng rng(13);
    DqnConfig c;
    c.batch_size = 2;
    c.target_sync = 3;
    c.gamma = 0.9;
    DqnAgent agent(toy_q(rng), c);
    Transition t{oracle::ToyEnv::code(0), 0, 1.0, oracle::ToyEnv::code(1), false};
    const std::vector<const Transition *> batch{&t, &t};
    const double first = agent.learn(batch);
    agent.learn(batch);
    agent.learn(batch); // sync after the third update
    EXPECT_EQ(agent.updates(), 3u);
    EXPECT_TRUE(std::isfinite(first));
}

TEST(Dqn, DivergentLossAborts) {
    Rng rng(14);
    DqnConfig c;
    c.batch_size = 1;
    DqnAgent agent(toy_q(rng), c);
    Transition t{oracle::ToyEnv::code(0), 0, std::numeric_limits<double>::infinity(), oracle::ToyEnv::code(1), true};
    EXPECT_THROW(agent.learn({&t}), NumericError);
}
