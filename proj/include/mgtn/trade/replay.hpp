#pragma once

#include <random>
#include <vector>

#include "mgtn/random.hpp"

namespace mgtn::trade {

struct Transition {
    Tensor state;
    int action = 0;
    double reward = 0.0;
    Tensor next_state;
    bool done = false;
};

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
        items_.reserve(capacity);
    }

    void push(Transition t) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(t));
        } else {
            items_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition &at(std::size_t i) const { return items_.at(i); }

    std::vector<const Transition *> sample(std::size_t batch, Rng &rng) const {
        if (batch == 0 || items_.size() < batch)
            throw Error("replay buffer holds " + std::to_string(items_.size()) + " transitions, batch of " +
                        std::to_string(batch) + " requested");
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        std::vector<const Transition *> out;
        for (std::size_t i = 0; i < batch; ++i) out.push_back(&items_[pick(rng)]);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

} // namespace mgtn::trade
