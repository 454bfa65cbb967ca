#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgtn/nn/layers.hpp"

namespace mgtn::nn {

class Optimizer {
public:
    virtual ~Optimizer() = default;
    /// Applies one update from the accumulated gradients; frozen parameters
    /// are left untouched.
    virtual void step(const std::vector<Parameter *> &params) = 0;
    virtual std::string name() const = 0;
    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) {
        if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive, got " + std::to_string(lr));
        lr_ = lr;
    }

protected:
    explicit Optimizer(double lr) { set_learning_rate(lr); }
    double lr_ = 1e-3;
};

class Adam final : public Optimizer {
public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : Optimizer(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

    std::string name() const override { return "adam"; }

    void step(const std::vector<Parameter *> &params) override {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        for (auto *p : params) {
            if (!p->trainable) continue;
            auto &st = state_[p->name];
            if (st.m.size() != p->value.size()) {
                st.m.assign(p->value.size(), 0.0);
                st.v.assign(p->value.size(), 0.0);
            }
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                const double g = p->grad[i];
                st.m[i] = b1_ * st.m[i] + (1.0 - b1_) * g;
                st.v[i] = b2_ * st.v[i] + (1.0 - b2_) * g * g;
                p->value[i] -= lr_ * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps_);
            }
        }
    }

private:
    struct Moments {
        std::vector<double> m, v;
    };
    double b1_, b2_, eps_;
    long t_ = 0;
    std::unordered_map<std::string, Moments> state_;
};

class RMSProp final : public Optimizer {
public:
    explicit RMSProp(double lr, double rho = 0.9, double eps = 1e-7) : Optimizer(lr), rho_(rho), eps_(eps) {}

    std::string name() const override { return "rmsprop"; }

    void step(const std::vector<Parameter *> &params) override {
        for (auto *p : params) {
            if (!p->trainable) continue;
            auto &acc = state_[p->name];
            if (acc.size() != p->value.size()) acc.assign(p->value.size(), 0.0);
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                const double g = p->grad[i];
                acc[i] = rho_ * acc[i] + (1.0 - rho_) * g * g;
                p->value[i] -= lr_ * g / (std::sqrt(acc[i]) + eps_);
            }
        }
    }

private:
    double rho_, eps_;
    std::unordered_map<std::string, std::vector<double>> state_;
};

class SGD final : public Optimizer {
public:
    explicit SGD(double lr) : Optimizer(lr) {}
    std::string name() const override { return "sgd"; }
    void step(const std::vector<Parameter *> &params) override {
        for (auto *p : params)
            if (p->trainable) p->value.add_scaled(p->grad, -lr_);
    }
};

inline std::unique_ptr<Optimizer> make_optimizer(const std::string &name, double lr) {
    if (name == "adam") return std::make_unique<Adam>(lr);
    if (name == "rmsprop") return std::make_unique<RMSProp>(lr);
    if (name == "sgd") return std::make_unique<SGD>(lr);
    throw ConfigError("unknown optimizer '" + name + "'");
}

} // namespace mgtn::nn
