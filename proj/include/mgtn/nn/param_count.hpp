#pragma once

#include <vector>

#include "mgtn/nn/model.hpp"

namespace mgtn::nn {

/// Closed-form fMGTN count: one J1 x J0 weight plus one beta per graph.
inline std::size_t fmgtn_param_count(std::size_t j0, std::size_t j1, std::size_t graphs) { return j1 * j0 + graphs; }

/// Closed-form gMGTN count: sum over m of J_m J_{m-1} + J_m^2 + 1, with
/// dims = (J_0, ..., J_M).
inline std::size_t gmgtn_param_count(const std::vector<std::size_t> &dims) {
    std::size_t n = 0;
    for (std::size_t m = 1; m < dims.size(); ++m) n += dims[m] * dims[m - 1] + dims[m] * dims[m] + 1;
    return n;
}

/// Weights needed to treat one mode with a dense map on the matricized
/// input: a (J1 prod_{k != m} I_k) x (J0 prod_{k != m} I_k) matrix.
inline std::size_t matricized_dense_param_count(std::size_t j0, std::size_t j1, const Shape &graph_sizes,
                                                std::size_t mode) {
    std::size_t other = 1;
    for (std::size_t k = 0; k < graph_sizes.size(); ++k)
        if (k + 1 != mode) other *= graph_sizes[k];
    return j0 * j1 * other * other;
}

/// Per-layer counts (all parameters, biases included).
inline std::vector<std::size_t> layer_param_counts(const Model &m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.layer_count(); ++i) out.push_back(m.layer(i).param_count());
    return out;
}

} // namespace mgtn::nn
