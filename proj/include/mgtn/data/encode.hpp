#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mgtn/error.hpp"

namespace mgtn::data {

/// One-hot encoding over a fixed category list. Values outside the list map
/// to all zeros and are counted.
class OneHotEncoder {
public:
    OneHotEncoder() = default;
    explicit OneHotEncoder(std::vector<std::string> categories) : categories_(std::move(categories)) {}

    /// Categories in order of first appearance.
    static OneHotEncoder fit(const std::vector<std::string> &values) {
        OneHotEncoder e;
        for (const auto &v : values)
            if (!v.empty() && v != "NA" && e.index(v) < 0) e.categories_.push_back(v);
        return e;
    }

    std::size_t width() const { return categories_.size(); }
    const std::vector<std::string> &categories() const { return categories_; }
    std::size_t unseen_count() const { return unseen_; }

    std::vector<double> encode(const std::string &value) {
        std::vector<double> out(categories_.size(), 0.0);
        const int i = index(value);
        if (i < 0)
            ++unseen_;
        else
            out[static_cast<std::size_t>(i)] = 1.0;
        return out;
    }

    std::vector<std::string> column_names(const std::string &prefix) const {
        std::vector<std::string> out;
        for (const auto &c : categories_) out.push_back(prefix + "_" + c);
        return out;
    }

private:
    int index(const std::string &v) const {
        for (std::size_t i = 0; i < categories_.size(); ++i)
            if (categories_[i] == v) return static_cast<int>(i);
        return -1;
    }

    std::vector<std::string> categories_;
    std::size_t unseen_ = 0;
};

/// The sixteen compass points used for wind direction.
inline std::vector<std::string> compass_points() {
    return {"N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW"};
}

/// Sinusoidal month code with period 12.
inline double month_sin(double month) { return std::sin(2.0 * std::numbers::pi * month / 12.0); }
inline double month_cos(double month) { return std::cos(2.0 * std::numbers::pi * month / 12.0); }

/// Replaces NaNs by the last finite value; returns the index of the first
/// finite entry (values.size() if none).
inline std::size_t forward_fill(std::vector<double> &values) {
    std::size_t first = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isfinite(values[i])) {
            if (first == values.size()) first = i;
        } else if (first != values.size()) {
            values[i] = values[i - 1];
        }
    }
    return first;
}

/// Forward fill for categorical cells ("" / "NA" are missing).
inline std::size_t forward_fill(std::vector<std::string> &values) {
    std::size_t first = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool missing = values[i].empty() || values[i] == "NA";
        if (!missing) {
            if (first == values.size()) first = i;
        } else if (first != values.size()) {
            values[i] = values[i - 1];
        }
    }
    return first;
}

} // namespace mgtn::data
