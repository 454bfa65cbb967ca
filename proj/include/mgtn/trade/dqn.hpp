#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mgtn/nn/model.hpp"
#include "mgtn/nn/optim.hpp"
#include "mgtn/trade/env.hpp"
#include "mgtn/trade/metrics.hpp"
#include "mgtn/trade/replay.hpp"

namespace mgtn::trade {

struct DqnConfig {
    double gamma = 0.99;
    double learning_rate = 2e-4;
    std::size_t batch_size = 64;
    std::size_t episodes = 15;
    std::size_t buffer_capacity = 100000;
    /// Target network refresh period in gradient updates (0 = no target net).
    std::size_t target_sync = 100;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    /// Share of all environment steps over which epsilon decays linearly.
    double epsilon_decay_fraction = 0.5;
    /// One gradient update every `train_every` environment steps.
    std::size_t train_every = 1;
    /// Multiplier applied to rewards in the TD target only.
    double reward_scale = 1.0;
};

/// Linear schedule from start to end over the first `fraction` of steps.
inline double linear_epsilon(const DqnConfig &c, std::size_t step, std::size_t total) {
    const double span = c.epsilon_decay_fraction * static_cast<double>(total);
    if (span <= 0.0) return c.epsilon_end;
    const double f = static_cast<double>(step) / span;
    if (f >= 1.0) return c.epsilon_end;
    return c.epsilon_start + f * (c.epsilon_end - c.epsilon_start);
}

/// Q-network agent with an optional target network.
class DqnAgent {
public:
    DqnAgent(nn::Model q, const DqnConfig &config)
        : q_(std::move(q)), target_(q_), config_(config), opt_(config.learning_rate) {
        if (config_.batch_size == 0) throw ConfigError("DQN batch size must be positive");
        if (config_.gamma < 0.0 || config_.gamma > 1.0) throw ConfigError("discount must lie in [0, 1]");
    }

    nn::Model &model() { return q_; }
    const DqnConfig &config() const { return config_; }
    std::size_t updates() const { return updates_; }

    std::vector<double> q_values(const Tensor &state) {
        Shape s = state.shape();
        s.push_back(1);
        const Tensor out = q_.forward(state.reshaped(s));
        return out.values();
    }

    int greedy(const Tensor &state) {
        const auto q = q_values(state);
        return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
    }

    int act(const Tensor &state, double epsilon, Rng &rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) < epsilon) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(q_.output_shape()[0]) - 1);
            return pick(rng);
        }
        return greedy(state);
    }

    /// One TD update on a sampled minibatch; squared error on the taken
    /// actions only. Returns the loss.
    double learn(const std::vector<const Transition *> &batch) {
        const std::size_t b = batch.size();
        const Shape ss = batch.front()->state.shape();
        const std::size_t per = shape_size(ss);
        Shape bs = ss;
        bs.push_back(b);
        Tensor states(bs), next(bs);
        for (std::size_t i = 0; i < b; ++i) {
            std::copy_n(batch[i]->state.data().begin(), per, states.data().begin() + static_cast<std::ptrdiff_t>(i * per));
            std::copy_n(batch[i]->next_state.data().begin(), per, next.data().begin() + static_cast<std::ptrdiff_t>(i * per));
        }
        nn::Model &tgt = config_.target_sync ? target_ : q_;
        const Tensor qn = config_.gamma > 0.0 ? tgt.forward(next) : Tensor();
        q_.zero_grad();
        const Tensor qs = q_.forward(states);
        const std::size_t na = qs.dim(0);
        Tensor grad(qs.shape());
        double loss = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            double y = config_.reward_scale * batch[i]->reward;
            if (config_.gamma > 0.0 && !batch[i]->done) {
                double best = qn(0, i);
                for (std::size_t a = 1; a < na; ++a) best = std::max(best, qn(a, i));
                y += config_.gamma * best;
            }
            const auto a = static_cast<std::size_t>(batch[i]->action);
            const double d = qs(a, i) - y;
            loss += d * d / static_cast<double>(b);
            grad(a, i) = 2.0 * d / static_cast<double>(b);
        }
        if (!std::isfinite(loss))
            throw NumericError("DQN loss diverged at update " + std::to_string(updates_) +
                               " (check learning rate and reward scale)");
        q_.backward(grad);
        opt_.step(q_.parameters());
        ++updates_;
        if (config_.target_sync && updates_ % config_.target_sync == 0) sync_target();
        return loss;
    }

    void sync_target() {
        auto dst = target_.parameters();
        auto src = q_.parameters();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
    }

private:
    nn::Model q_;
    nn::Model target_;
    DqnConfig config_;
    nn::Adam opt_;
    std::size_t updates_ = 0;
};

struct EpisodeLog {
    std::size_t episode = 0;
    std::size_t steps = 0;
    double epsilon = 0.0;
    double loss = 0.0;
    FinancialMetrics metrics;
};

/// Epsilon-greedy training with uniform replay.
inline std::vector<EpisodeLog> train_dqn(Environment &env, DqnAgent &agent, Rng &explore_rng, Rng &replay_rng,
                                         const std::function<void(const EpisodeLog &)> &on_episode = {}) {
    const DqnConfig &c = agent.config();
    ReplayBuffer buffer(c.buffer_capacity);
    const std::size_t total = c.episodes * env.length();
    std::size_t step = 0;
    std::vector<EpisodeLog> logs;
    for (std::size_t ep = 0; ep < c.episodes; ++ep) {
        Tensor s = env.reset();
        std::vector<double> rewards;
        double loss_sum = 0.0;
        std::size_t loss_n = 0;
        double eps = c.epsilon_start;
        for (bool done = false; !done; ++step) {
            eps = linear_epsilon(c, step, total);
            const int a = agent.act(s, eps, explore_rng);
            StepResult r = env.step(a);
            rewards.push_back(r.reward);
            done = r.done;
            buffer.push({s, a, r.reward, r.state, r.done});
            s = std::move(r.state);
            if (buffer.size() >= c.batch_size && step % c.train_every == 0) {
                loss_sum += agent.learn(buffer.sample(c.batch_size, replay_rng));
                ++loss_n;
            }
        }
        EpisodeLog log{ep + 1, rewards.size(), eps, loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0,
                       financial_metrics(rewards)};
        logs.push_back(log);
        if (on_episode) on_episode(log);
    }
    return logs;
}

struct Evaluation {
    std::vector<int> actions;
    std::vector<double> rewards;
    FinancialMetrics metrics;
};

/// Greedy rollout of one episode.
inline Evaluation evaluate_greedy(Environment &env, DqnAgent &agent) {
    Evaluation e;
    Tensor s = env.reset();
    for (bool done = false; !done;) {
        const int a = agent.greedy(s);
        StepResult r = env.step(a);
        e.actions.push_back(a);
        e.rewards.push_back(r.reward);
        done = r.done;
        s = std::move(r.state);
    }
    e.metrics = financial_metrics(e.rewards);
    return e;
}

} // namespace mgtn::trade
