#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mgtn/csv.hpp"
#include "mgtn/tensor.hpp"

namespace mgtn {

/// Weighted adjacency of a graph on N nodes: a(n, m) > 0 iff edge n <- m.
struct AdjacencyMatrix {
    Tensor a;
    bool directed = false;
    std::vector<std::string> node_names;

    AdjacencyMatrix() = default;
    AdjacencyMatrix(Tensor adj, bool is_directed) : a(std::move(adj)), directed(is_directed) { validate(); }

    std::size_t nodes() const { return a.dim(0); }

    void validate() const {
        if (a.order() != 2 || a.dim(0) != a.dim(1))
            throw ShapeError("adjacency matrix must be square, got " + to_string(a.shape()));
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!std::isfinite(a[i])) throw DataError("adjacency matrix has a non-finite entry");
            if (a[i] < 0.0) throw DataError("adjacency matrix has a negative entry " + format_number(a[i]));
        }
    }

    bool is_symmetric(double tol = 0.0) const {
        for (std::size_t i = 0; i < nodes(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(a(i, j) - a(j, i)) > tol) return false;
        return true;
    }
};

/// D^{-1/2} A D^{-1/2} with d_n = sum_m a(n, m); isolated nodes use 0^{-1/2} := 0.
inline AdjacencyMatrix degree_and_normalize(const AdjacencyMatrix &g) {
    g.validate();
    const std::size_t n = g.nodes();
    std::vector<double> inv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d += g.a(i, j);
        inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    AdjacencyMatrix out = g;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.a(i, j) = inv_sqrt[i] * g.a(i, j) * inv_sqrt[j];
    return out;
}

/// G = (I + A) F for N x M signals F.
inline Tensor graph_shift(const AdjacencyMatrix &g, const Tensor &f) {
    if (f.order() != 2 || f.dim(0) != g.nodes())
        throw ShapeError("graph_shift: signals " + to_string(f.shape()) + " do not live on " +
                         std::to_string(g.nodes()) + " nodes");
    return f + matmul(g.a, f);
}

/// F = I + beta A, the shift filter used by the fast layers.
struct GraphShiftFilter {
    Tensor f;

    static GraphShiftFilter build(const AdjacencyMatrix &g, double beta) {
        Tensor f = g.a * beta;
        for (std::size_t i = 0; i < g.nodes(); ++i) f(i, i) += 1.0;
        return {std::move(f)};
    }
};

/**
 * Order-4 filter tensorize(I + beta (A kron P)) of shape (J, I, J, I), where
 * A is the I x I graph and P the J x J propagation matrix:
 * f[j, i, j', i'] = delta + beta * a(i, i') * p(j, j').
 */
struct MultiLinearGraphFilter {
    Tensor f;
    double beta = 0.0;
    Tensor a;
    Tensor p;

    /// Re-derives the filter from (A, P, beta) and compares exactly.
    bool consistent() const;
};

inline MultiLinearGraphFilter multilinear_filter(const Tensor &a, const Tensor &p, double beta) {
    if (a.order() != 2 || a.dim(0) != a.dim(1))
        throw ShapeError("multilinear_filter: adjacency must be square, got " + to_string(a.shape()));
    if (p.order() != 2 || p.dim(0) != p.dim(1))
        throw ShapeError("multilinear_filter: propagation matrix must be square, got " + to_string(p.shape()));
    const std::size_t ni = a.dim(0), nj = p.dim(0);
    Tensor op = kronecker(a, p) * beta;
    for (std::size_t k = 0; k < ni * nj; ++k) op(k, k) += 1.0;
    return {tensorize(op, Shape{nj, ni, nj, ni}), beta, a, p};
}

inline bool MultiLinearGraphFilter::consistent() const { return multilinear_filter(a, p, beta).f == f; }

/**
 * Applies an order-4 filter to mode 1 (features) and mode m+1 (graph m) of
 * y = (J, I_1, ..., I_M) by the contraction F x_{3,4}^{1,m+1} y, then moves
 * the graph mode back to position m+1 so the result is (J, I_1, ..., I_M).
 */
inline Tensor apply_multilinear_filter(const MultiLinearGraphFilter &filter, const Tensor &y, std::size_t m) {
    if (m < 1 || m + 1 > y.order()) throw ShapeError("apply_multilinear_filter: graph mode out of range");
    Tensor c = contract(filter.f, y, {{3, 1}, {4, m + 1}});
    // c is (J, I_m, I_1..I_{m-1}, I_{m+1}..); restore canonical order.
    std::vector<std::size_t> perm{0};
    for (std::size_t k = 1; k < y.order(); ++k) perm.push_back(k == m ? 1 : (k < m ? k + 1 : k));
    return permute(c, perm);
}

struct TimeGraphOptions {
    bool bidirectional = false;
    /// a(t, t-k) = decay^{k-1} for k = 1..hops.
    double decay = 1.0;
    std::size_t hops = 1;
};

/// Directed lower-shift time graph (past -> future), optionally symmetrised.
inline AdjacencyMatrix build_time_graph(std::size_t steps, const TimeGraphOptions &opts = {}) {
    if (steps < 2) throw ShapeError("time graph needs at least 2 steps, got " + std::to_string(steps));
    if (!(opts.decay > 0.0 && opts.decay <= 1.0)) throw ShapeError("time graph decay must lie in (0,1]");
    if (opts.hops < 1) throw ShapeError("time graph needs hops >= 1");
    Tensor a({steps, steps});
    for (std::size_t t = 1; t < steps; ++t)
        for (std::size_t k = 1; k <= std::min(opts.hops, t); ++k)
            a(t, t - k) = std::pow(opts.decay, static_cast<double>(k - 1));
    if (opts.bidirectional) a += transpose(a);
    return AdjacencyMatrix(std::move(a), !opts.bidirectional);
}

inline double euclidean(const std::vector<double> &x, const std::vector<double> &y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
    return std::sqrt(s);
}

/// Median of the pairwise Euclidean distances (the default kernel width).
inline double median_pairwise_distance(const std::vector<std::vector<double>> &features) {
    std::vector<double> d;
    for (std::size_t i = 0; i < features.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) d.push_back(euclidean(features[i], features[j]));
    if (d.empty()) return 1.0;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
    double med = d[d.size() / 2];
    if (d.size() % 2 == 0) {
        const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2));
        med = 0.5 * (med + lower);
    }
    return med > 0.0 ? med : 1.0;
}

/// Gaussian-kernel graph a_ij = exp(-d(s_i, s_j)^2 / (2 sigma^2)), zero diagonal.
/// sigma defaults to the median pairwise distance.
inline AdjacencyMatrix build_kernel_graph(const std::vector<std::vector<double>> &features,
                                          std::optional<double> sigma = std::nullopt) {
    if (features.empty()) throw DataError("kernel graph needs at least one node");
    for (const auto &f : features)
        if (f.size() != features.front().size()) throw DataError("kernel graph: feature vectors differ in length");
    const double s = sigma ? *sigma : median_pairwise_distance(features);
    if (!(s > 0.0)) throw ShapeError("kernel graph sigma must be positive, got " + format_number(s));
    const std::size_t n = features.size();
    Tensor a({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = euclidean(features[i], features[j]);
            a(i, j) = std::exp(-d * d / (2.0 * s * s));
        }
    return AdjacencyMatrix(std::move(a), false);
}

inline double pearson(const std::vector<double> &x, const std::vector<double> &y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// a_ij = max(pearson(x_i, x_j), 0) off the diagonal.
inline AdjacencyMatrix build_correlation_graph(const std::vector<std::vector<double>> &series,
                                               const std::vector<std::string> &names = {}) {
    const std::size_t n = series.size();
    if (n == 0) throw DataError("correlation graph needs at least one series");
    auto name = [&](std::size_t i) { return i < names.size() ? names[i] : "node " + std::to_string(i); };
    for (std::size_t i = 0; i < n; ++i) {
        if (series[i].size() != series[0].size() || series[i].size() < 2)
            throw DataError("correlation graph: series of " + name(i) + " has a different or too short length");
        const auto [lo, hi] = std::minmax_element(series[i].begin(), series[i].end());
        if (*lo == *hi) throw DataError("correlation graph: series of " + name(i) + " is constant (zero variance)");
    }
    Tensor a({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i) = std::max(pearson(series[i], series[j]), 0.0);
    AdjacencyMatrix g(std::move(a), false);
    g.node_names = names;
    return g;
}

enum class CarryMode { Relu, Absolute };

/// c = 1 - forward/spot per pair.
inline double carry_signal(double spot, double forward) {
    if (!(spot > 0.0)) throw DataError("carry signal needs a positive spot rate, got " + format_number(spot));
    return 1.0 - forward / spot;
}

/// Directed carry graph: a_ij = g(c_ij) / max g(c), g = max(., 0) or |.|,
/// from N x N matrices of spot and forward rates of pair (i, j).
inline AdjacencyMatrix build_carry_graph(const Tensor &spot, const Tensor &forward, CarryMode mode = CarryMode::Relu) {
    if (spot.order() != 2 || spot.dim(0) != spot.dim(1) || spot.shape() != forward.shape())
        throw ShapeError("carry graph needs square spot and forward matrices of equal shape");
    const std::size_t n = spot.dim(0);
    Tensor a({n, n});
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double c = carry_signal(spot(i, j), forward(i, j));
            a(i, j) = mode == CarryMode::Relu ? std::max(c, 0.0) : std::abs(c);
            peak = std::max(peak, a(i, j));
        }
    if (peak > 0.0) a *= 1.0 / peak;
    return AdjacencyMatrix(std::move(a), true);
}

// Graph files: square CSV whose header row holds the node names.

inline AdjacencyMatrix read_adjacency_csv(const std::string &path, bool directed) {
    const CsvTable t = read_csv_file(path);
    const std::size_t n = t.header.size();
    if (t.rows.size() != n)
        throw DataError(path + ": adjacency has " + std::to_string(n) + " columns but " + std::to_string(t.rows.size()) +
                        " rows");
    Tensor a({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = parse_number(t.rows[i][j], path + ":" + std::to_string(i + 2));
    AdjacencyMatrix g(std::move(a), directed);
    g.node_names = t.header;
    return g;
}

inline void write_adjacency_csv(const std::string &path, const AdjacencyMatrix &g) {
    CsvTable t;
    for (std::size_t i = 0; i < g.nodes(); ++i)
        t.header.push_back(i < g.node_names.size() ? g.node_names[i] : "n" + std::to_string(i));
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        std::vector<std::string> row;
        for (std::size_t j = 0; j < g.nodes(); ++j) row.push_back(format_number(g.a(i, j)));
        t.rows.push_back(std::move(row));
    }
    write_csv_file(path, t);
}

} // namespace mgtn
