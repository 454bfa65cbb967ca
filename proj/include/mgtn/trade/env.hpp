#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mgtn/data/dataset.hpp"

namespace mgtn::trade {

enum Action : int { Buy = 0, Sell = 1 };

inline double position_of(int action) { return action == Buy ? 1.0 : -1.0; }

struct StepResult {
    Tensor state;
    double reward = 0.0;
    bool done = false;
};

/// Episodic environment with a discrete action set.
class Environment {
public:
    virtual ~Environment() = default;
    virtual Tensor reset() = 0;
    virtual StepResult step(int action) = 0;
    virtual std::size_t num_actions() const = 0;
    virtual Shape state_shape() const = 0;
    /// Steps per episode.
    virtual std::size_t length() const = 0;
};

/**
 * Steps through windowed market samples. The state at step t is sample t;
 * taking a position earns position * next log-return of the traded
 * currency, minus `cost` per unit of position change.
 */
class MarketEnv final : public Environment {
public:
    MarketEnv(data::SampleSet samples, std::vector<double> next_returns, double cost = 0.0)
        : samples_(std::move(samples)), returns_(std::move(next_returns)), cost_(cost) {
        if (samples_.size() == 0) throw DataError("market environment has no samples");
        if (returns_.size() != samples_.size())
            throw DataError("market environment: " + std::to_string(samples_.size()) + " states but " +
                            std::to_string(returns_.size()) + " returns");
        shape_ = samples_.sample_shape();
        per_ = shape_size(shape_);
    }

    /// Uses row `currency` of the sample targets as the next-step returns.
    static MarketEnv from_targets(data::SampleSet samples, std::size_t currency, double cost = 0.0) {
        if (currency >= samples.targets.dim(0)) throw ConfigError("traded currency index out of range");
        std::vector<double> r;
        for (std::size_t n = 0; n < samples.size(); ++n) r.push_back(samples.targets(currency, n));
        return MarketEnv(std::move(samples), std::move(r), cost);
    }

    Tensor reset() override {
        t_ = 0;
        position_ = 0.0;
        done_ = false;
        return state(0);
    }

    StepResult step(int action) override {
        if (done_) throw Error("market environment stepped after the episode ended");
        if (action != Buy && action != Sell) throw Error("invalid action " + std::to_string(action));
        const double pos = position_of(action);
        StepResult r;
        r.reward = pos * returns_[t_] - cost_ * std::abs(pos - position_);
        position_ = pos;
        ++t_;
        r.done = t_ >= samples_.size();
        done_ = r.done;
        r.state = state(r.done ? samples_.size() - 1 : t_);
        return r;
    }

    std::size_t num_actions() const override { return 2; }
    Shape state_shape() const override { return shape_; }
    std::size_t length() const override { return samples_.size(); }

    Tensor state(std::size_t t) const {
        std::vector<double> v(samples_.inputs.values().begin() + static_cast<std::ptrdiff_t>(t * per_),
                              samples_.inputs.values().begin() + static_cast<std::ptrdiff_t>((t + 1) * per_));
        return Tensor(shape_, std::move(v));
    }

    const std::vector<double> &returns() const { return returns_; }
    const data::SampleSet &samples() const { return samples_; }

private:
    data::SampleSet samples_;
    std::vector<double> returns_;
    double cost_;
    Shape shape_;
    std::size_t per_ = 0;
    std::size_t t_ = 0;
    double position_ = 0.0;
    bool done_ = true;
};

} // namespace mgtn::trade
