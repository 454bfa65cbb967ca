#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mgtn/tensor.hpp"

namespace mgtn::data {

/// Features x time x entities panel with aligned target series.
struct Panel {
    Tensor x; // (J0, T, E)
    Tensor y; // (K, T)
    std::vector<std::string> features;
    std::vector<std::string> entities;
    std::vector<std::string> times;

    std::size_t steps() const { return x.dim(1); }
};

/**
 * Windowed samples. Inputs keep the sample modes first and the sample index
 * last: (J0, I1, ..., IM, N); targets are (K, N).
 */
struct SampleSet {
    Tensor inputs;
    Tensor targets;
    std::vector<std::string> feature_names;
    std::vector<std::string> entity_names;
    /// Timestamp of each sample's target step.
    std::vector<std::string> timestamps;

    std::size_t size() const { return inputs.order() == 0 ? 0 : inputs.shape().back(); }

    Shape sample_shape() const { return Shape(inputs.shape().begin(), inputs.shape().end() - 1); }

    void validate() const {
        if (inputs.order() < 2 || targets.order() < 2) throw DataError("sample set has no batch mode");
        if (inputs.shape().back() != targets.shape().back())
            throw DataError("sample set has " + std::to_string(inputs.shape().back()) + " inputs but " +
                            std::to_string(targets.shape().back()) + " targets");
        if (!timestamps.empty() && timestamps.size() != size())
            throw DataError("sample set timestamps do not match the sample count");
        if (!inputs.all_finite()) throw DataError("sample inputs contain non-finite values");
        if (!targets.all_finite()) throw DataError("sample targets contain non-finite values");
    }

    SampleSet slice(std::size_t begin, std::size_t end) const {
        if (begin >= end || end > size()) throw DataError("empty or out-of-range sample slice");
        SampleSet s;
        s.inputs = slice_last(inputs, begin, end);
        s.targets = slice_last(targets, begin, end);
        s.feature_names = feature_names;
        s.entity_names = entity_names;
        if (!timestamps.empty())
            s.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                                timestamps.begin() + static_cast<std::ptrdiff_t>(end));
        return s;
    }

    static Tensor slice_last(const Tensor &t, std::size_t begin, std::size_t end) {
        const std::size_t per = t.size() / t.shape().back();
        Shape s = t.shape();
        s.back() = end - begin;
        std::vector<double> v(t.values().begin() + static_cast<std::ptrdiff_t>(begin * per),
                              t.values().begin() + static_cast<std::ptrdiff_t>(end * per));
        return Tensor(std::move(s), std::move(v));
    }
};

/// Appends sample sets with identical sample and target shapes.
inline SampleSet concatenate(const std::vector<SampleSet> &parts) {
    if (parts.empty()) throw DataError("nothing to concatenate");
    SampleSet out;
    out.feature_names = parts.front().feature_names;
    out.entity_names = parts.front().entity_names;
    Shape xs = parts.front().inputs.shape(), ys = parts.front().targets.shape();
    std::vector<double> xv, yv;
    std::size_t n = 0;
    for (const auto &p : parts) {
        if (p.sample_shape() != parts.front().sample_shape() || p.targets.dim(0) != ys[0])
            throw DataError("cannot concatenate sample sets of different shapes");
        xv.insert(xv.end(), p.inputs.values().begin(), p.inputs.values().end());
        yv.insert(yv.end(), p.targets.values().begin(), p.targets.values().end());
        out.timestamps.insert(out.timestamps.end(), p.timestamps.begin(), p.timestamps.end());
        n += p.size();
    }
    xs.back() = n;
    ys.back() = n;
    out.inputs = Tensor(xs, std::move(xv));
    out.targets = Tensor(ys, std::move(yv));
    return out;
}

/// r_t = ln p_t - ln p_{t-1}.
inline std::vector<double> log_returns(const std::vector<double> &prices) {
    for (std::size_t i = 0; i < prices.size(); ++i)
        if (!(prices[i] > 0.0))
            throw DataError("log_returns: non-positive price " + std::to_string(prices[i]) + " at row " +
                            std::to_string(i));
    std::vector<double> r;
    for (std::size_t i = 1; i < prices.size(); ++i) r.push_back(std::log(prices[i]) - std::log(prices[i - 1]));
    return r;
}

inline std::size_t window_count(std::size_t steps, std::size_t window, std::size_t horizon) {
    return steps + 1 < window + horizon + 1 ? 0 : steps - window - horizon + 1;
}

/**
 * Sliding windows with stride 1: sample n covers steps [n, n + window) of the
 * panel and targets column n + window - 1 + horizon of panel.y.
 */
inline SampleSet window_tensorize(const Panel &p, std::size_t window, std::size_t horizon = 1) {
    if (p.x.order() != 3) throw DataError("panel must be (features, time, entities), got " + to_string(p.x.shape()));
    const std::size_t j0 = p.x.dim(0), t = p.x.dim(1), e = p.x.dim(2);
    if (window == 0) throw DataError("window must be positive");
    if (p.y.order() != 2 || p.y.dim(1) != t) throw DataError("target series do not align with the panel time mode");
    const std::size_t n = window_count(t, window, horizon);
    if (n == 0)
        throw DataError("window " + std::to_string(window) + " plus horizon " + std::to_string(horizon) +
                        " exceeds the series length " + std::to_string(t));
    const std::size_t k = p.y.dim(0);
    SampleSet s;
    s.inputs = Tensor({j0, window, e, n});
    s.targets = Tensor({k, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t ent = 0; ent < e; ++ent)
            for (std::size_t w = 0; w < window; ++w)
                for (std::size_t f = 0; f < j0; ++f) s.inputs(f, w, ent, i) = p.x(f, i + w, ent);
        const std::size_t tt = i + window - 1 + horizon;
        for (std::size_t r = 0; r < k; ++r) s.targets(r, i) = p.y(r, tt);
        if (!p.times.empty()) s.timestamps.push_back(p.times.at(tt));
    }
    s.feature_names = p.features;
    s.entity_names = p.entities;
    return s;
}

// ---------------------------------------------------------------------------
// Chronological splits

struct Split {
    std::size_t train_end = 0; // [0, train_end)
    std::size_t val_end = 0;   // [train_end, val_end)
    std::size_t total = 0;     // test is [val_end, total)

    std::size_t train() const { return train_end; }
    std::size_t val() const { return val_end - train_end; }
    std::size_t test() const { return total - val_end; }
};

/// First `train_fraction` of samples for fitting (of which the last
/// `val_fraction` is held out for validation), the rest for testing.
inline Split chronological_split(std::size_t n, double train_fraction = 0.7, double val_fraction = 0.2) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0) || !(val_fraction >= 0.0 && val_fraction < 1.0))
        throw ConfigError("split fractions must lie in (0, 1)");
    const auto fit = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    const auto val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(fit) + 1e-9));
    Split s{fit - val, fit, n};
    if (s.train() == 0 || s.test() == 0 || (val_fraction > 0.0 && s.val() == 0))
        throw DataError("split of " + std::to_string(n) + " samples leaves an empty partition");
    return s;
}

/// Training on the samples whose date (first 10 characters of the timestamp)
/// is among the first `train_days` distinct dates; no validation part.
inline Split split_by_days(const std::vector<std::string> &timestamps, std::size_t train_days) {
    std::vector<std::string> dates;
    std::size_t end = 0;
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        const std::string d = timestamps[i].substr(0, 10);
        if (i > 0 && d < timestamps[i - 1].substr(0, 10)) throw DataError("timestamps are not chronological");
        if (dates.empty() || dates.back() != d) dates.push_back(d);
        if (dates.size() <= train_days) end = i + 1;
    }
    Split s{end, end, timestamps.size()};
    if (s.train() == 0 || s.test() == 0)
        throw DataError("a " + std::to_string(train_days) + "-day training window over " + std::to_string(dates.size()) +
                        " days leaves an empty partition");
    return s;
}

// ---------------------------------------------------------------------------

/// Per-row z-scoring of a (rows, time, ...) tensor, fitted on time steps
/// [0, fit_end) only; population standard deviation, constant rows map to 0.
class Standardizer {
public:
    void fit(const Tensor &x, std::size_t fit_end) {
        if (x.order() < 2) throw DataError("standardizer needs a (rows, time, ...) tensor");
        if (fit_end == 0 || fit_end > x.dim(1)) throw DataError("standardizer fit range is empty or too long");
        const std::size_t rows = x.dim(0);
        mean_.assign(rows, 0.0);
        std_.assign(rows, 0.0);
        std::vector<std::size_t> count(rows, 0);
        visit(x, fit_end, [&](std::size_t r, double v) {
            mean_[r] += v;
            ++count[r];
        });
        for (std::size_t r = 0; r < rows; ++r) mean_[r] /= static_cast<double>(count[r]);
        visit(x, fit_end, [&](std::size_t r, double v) { std_[r] += (v - mean_[r]) * (v - mean_[r]); });
        for (std::size_t r = 0; r < rows; ++r) {
            std_[r] = std::sqrt(std_[r] / static_cast<double>(count[r]));
            if (!(std_[r] > 1e-12)) std_[r] = 1.0;
        }
    }

    Tensor transform(const Tensor &x) const {
        check(x);
        Tensor y = x;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const std::size_t r = i % mean_.size();
            y[i] = (y[i] - mean_[r]) / std_[r];
        }
        return y;
    }

    Tensor inverse(const Tensor &x) const {
        check(x);
        Tensor y = x;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const std::size_t r = i % mean_.size();
            y[i] = y[i] * std_[r] + mean_[r];
        }
        return y;
    }

    const std::vector<double> &mean() const { return mean_; }
    const std::vector<double> &stddev() const { return std_; }

private:
    template <class F> static void visit(const Tensor &x, std::size_t fit_end, F &&f) {
        const std::size_t rows = x.dim(0), steps = x.dim(1);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::size_t t = (i / rows) % steps;
            if (t < fit_end) f(i % rows, x[i]);
        }
    }

    void check(const Tensor &x) const {
        if (mean_.empty()) throw DataError("standardizer used before fit");
        if (x.order() == 0 || x.dim(0) != mean_.size())
            throw DataError("standardizer fitted on " + std::to_string(mean_.size()) + " rows, got " + to_string(x.shape()));
    }

    std::vector<double> mean_, std_;
};

} // namespace mgtn::data
