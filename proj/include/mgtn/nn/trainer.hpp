#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "mgtn/nn/model.hpp"
#include "mgtn/nn/optim.hpp"

namespace mgtn::nn {

/// Copies the samples listed in `idx` out of a tensor whose trailing mode
/// indexes samples.
inline Tensor take_samples(const Tensor &x, const std::vector<std::size_t> &idx) {
    if (x.order() == 0) throw ShapeError("take_samples needs a batch mode");
    const std::size_t n = x.shape().back();
    const std::size_t per = x.size() / n;
    Shape s = x.shape();
    s.back() = idx.size();
    Tensor out(s);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= n) throw ShapeError("sample index " + std::to_string(idx[k]) + " out of range");
        std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(idx[k] * per), per,
                    out.data().begin() + static_cast<std::ptrdiff_t>(k * per));
    }
    return out;
}

inline Tensor take_range(const Tensor &x, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    return take_samples(x, idx);
}

/// One optimisation step on a minibatch; returns the loss before the update.
inline double train_step(Model &model, Optimizer &opt, const Tensor &x, const Tensor &y, std::size_t batch_index = 0) {
    model.zero_grad();
    const Tensor pred = model.forward(x);
    LossResult r = mse_loss(pred, y);
    if (!std::isfinite(r.loss))
        throw NumericError("non-finite loss at batch " + std::to_string(batch_index));
    model.backward(r.grad);
    opt.step(model.parameters());
    return r.loss;
}

/// Loss of the model on a dataset, evaluated in chunks.
inline double evaluate_loss(Model &model, const Tensor &x, const Tensor &y, std::size_t chunk = 256) {
    const std::size_t n = x.shape().back();
    double total = 0.0;
    for (std::size_t b = 0; b < n; b += chunk) {
        const std::size_t e = std::min(n, b + chunk);
        total += mse(model.forward(take_range(x, b, e)), take_range(y, b, e)) * static_cast<double>(e - b);
    }
    return total / static_cast<double>(n);
}

inline Tensor predict(Model &model, const Tensor &x, std::size_t chunk = 256) {
    const std::size_t n = x.shape().back();
    std::vector<Tensor> parts;
    for (std::size_t b = 0; b < n; b += chunk) parts.push_back(model.forward(take_range(x, b, std::min(n, b + chunk))));
    Shape s = parts.front().shape();
    s.back() = n;
    Tensor out(s);
    std::size_t off = 0;
    for (const auto &p : parts) {
        std::copy(p.data().begin(), p.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(off));
        off += p.size();
    }
    return out;
}

struct TrainOptions {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    bool shuffle = true;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
};

/// Minibatch training. `on_epoch` may return false to stop early.
inline std::vector<EpochRecord> fit(Model &model, Optimizer &opt, const Tensor &x, const Tensor &y,
                                    const TrainOptions &options, Rng &shuffle_rng, const Tensor *x_val = nullptr,
                                    const Tensor *y_val = nullptr,
                                    const std::function<bool(const EpochRecord &)> &on_epoch = {}) {
    if (options.batch_size == 0) throw ConfigError("batch size must be positive");
    const std::size_t n = x.shape().back();
    if (y.shape().back() != n) throw ShapeError("inputs and targets hold different sample counts");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<EpochRecord> history;
    std::size_t batch_index = 0;
    for (std::size_t ep = 0; ep < options.epochs; ++ep) {
        if (options.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
        double total = 0.0;
        for (std::size_t b = 0; b < n; b += options.batch_size) {
            const std::size_t e = std::min(n, b + options.batch_size);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(b),
                                         order.begin() + static_cast<std::ptrdiff_t>(e));
            total += train_step(model, opt, take_samples(x, idx), take_samples(y, idx), batch_index++) *
                     static_cast<double>(e - b);
        }
        EpochRecord rec{ep + 1, total / static_cast<double>(n), std::nullopt};
        if (x_val && y_val && x_val->shape().back() > 0) rec.val_loss = evaluate_loss(model, *x_val, *y_val);
        history.push_back(rec);
        if (on_epoch && !on_epoch(rec)) break;
    }
    return history;
}

} // namespace mgtn::nn
