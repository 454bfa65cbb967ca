#pragma once

#include <cmath>
#include <string>

#include "mgtn/tensor.hpp"

namespace mgtn::nn {

enum class Activation { Linear, Relu, Tanh, Sigmoid };

inline Activation parse_activation(const std::string &name) {
    if (name == "linear" || name == "identity") return Activation::Linear;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw ShapeError("unknown activation '" + name + "'");
}

inline std::string activation_name(Activation a) {
    switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    }
    return "linear";
}

inline void activate_inplace(Tensor &z, Activation a) {
    switch (a) {
    case Activation::Linear: break;
    case Activation::Relu:
        for (double &v : z.data()) v = v > 0.0 ? v : 0.0;
        break;
    case Activation::Tanh:
        for (double &v : z.data()) v = std::tanh(v);
        break;
    case Activation::Sigmoid:
        for (double &v : z.data()) v = 1.0 / (1.0 + std::exp(-v));
        break;
    }
}

/// Multiplies grad by the activation derivative, expressed through the
/// activation output y.
inline void activation_backward_inplace(Tensor &grad, const Tensor &y, Activation a) {
    switch (a) {
    case Activation::Linear: break;
    case Activation::Relu:
        for (std::size_t i = 0; i < grad.size(); ++i)
            if (!(y[i] > 0.0)) grad[i] = 0.0;
        break;
    case Activation::Tanh:
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - y[i] * y[i];
        break;
    case Activation::Sigmoid:
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= y[i] * (1.0 - y[i]);
        break;
    }
}

} // namespace mgtn::nn
