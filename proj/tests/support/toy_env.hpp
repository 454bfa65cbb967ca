#pragma once

// Two-state environment with a deterministic reward table, used to check
// that Q-learning recovers immediate rewards when the discount is zero.

#include "mgtn/trade/env.hpp"

namespace mgtn::oracle {

class ToyEnv final : public trade::Environment {
public:
    /// rewards[s][a]; the state alternates 0, 1, 0, ... each step.
    ToyEnv(double r00, double r01, double r10, double r11, std::size_t length)
        : r_{{r00, r01}, {r10, r11}}, length_(length) {}

    Tensor reset() override {
        s_ = 0;
        t_ = 0;
        return code(0);
    }

    trade::StepResult step(int action) override {
        trade::StepResult r;
        r.reward = r_[s_][action];
        s_ = 1 - s_;
        ++t_;
        r.done = t_ >= length_;
        r.state = code(s_);
        return r;
    }

    std::size_t num_actions() const override { return 2; }
    Shape state_shape() const override { return {2}; }
    std::size_t length() const override { return length_; }

    double reward(std::size_t s, std::size_t a) const { return r_[s][a]; }

    static Tensor code(std::size_t s) {
        Tensor t({2});
        t[s] = 1.0;
        return t;
    }

private:
    double r_[2][2];
    std::size_t length_;
    std::size_t s_ = 0, t_ = 0;
};

} // namespace mgtn::oracle
