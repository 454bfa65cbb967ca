#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "mgtn/error.hpp"

namespace mgtn::trade {

/// Equity path starting at `start` from per-step log-returns.
inline std::vector<double> equity_curve(const std::vector<double> &log_returns, double start = 1.0) {
    std::vector<double> e{start};
    double acc = 0.0;
    for (double r : log_returns) {
        acc += r;
        e.push_back(start * std::exp(acc));
    }
    return e;
}

/// Total return in percent: (exp(sum r) - 1) * 100.
inline double total_return_pct(const std::vector<double> &r) {
    return (std::exp(std::accumulate(r.begin(), r.end(), 0.0)) - 1.0) * 100.0;
}

struct SharpeResult {
    double value = 0.0;
    /// Set when the return series has zero (or undefined) dispersion.
    bool degenerate = false;
};

/// Mean over sample standard deviation of per-step returns.
inline SharpeResult sharpe_ratio(const std::vector<double> &r) {
    if (r.size() < 2) return {0.0, true};
    const double n = static_cast<double>(r.size());
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) return {0.0, true};
    return {mean / sd, false};
}

/// Largest peak-to-trough decline of an equity path, in percent.
inline double max_drawdown_pct(const std::vector<double> &equity) {
    if (equity.empty()) throw DataError("max drawdown of an empty equity path");
    double peak = equity.front(), worst = 0.0;
    for (double e : equity) {
        if (e > peak) peak = e;
        if (peak > 0.0) worst = std::max(worst, (peak - e) / peak);
    }
    return worst * 100.0;
}

/// Share of steps with a positive return, in percent; every held step
/// counts as one trade outcome.
inline double hit_ratio_pct(const std::vector<double> &r) {
    if (r.empty()) return 0.0;
    std::size_t wins = 0;
    for (double v : r) wins += v > 0.0;
    return 100.0 * static_cast<double>(wins) / static_cast<double>(r.size());
}

struct FinancialMetrics {
    double tr = 0.0;
    double sr = 0.0;
    double md = 0.0;
    double hr = 0.0;
    bool sr_degenerate = false;
    std::size_t steps = 0;
};

inline FinancialMetrics financial_metrics(const std::vector<double> &r) {
    if (r.empty()) throw DataError("financial metrics need at least one return");
    FinancialMetrics m;
    m.tr = total_return_pct(r);
    const auto s = sharpe_ratio(r);
    m.sr = s.value;
    m.sr_degenerate = s.degenerate;
    m.md = max_drawdown_pct(equity_curve(r));
    m.hr = hit_ratio_pct(r);
    m.steps = r.size();
    return m;
}

} // namespace mgtn::trade
