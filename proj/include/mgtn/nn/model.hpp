#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgtn/nn/layers.hpp"

namespace mgtn::nn {

/// A sequential stack of layers with shape inference from the sample shape.
class Model {
public:
    Model() = default;

    Model(Shape input_shape, std::vector<LayerSpec> specs, std::vector<AdjacencyMatrix> graphs, Rng &rng)
        : input_shape_(std::move(input_shape)), graphs_(std::move(graphs)) {
        if (input_shape_.empty()) throw ShapeError("model input shape is empty");
        if (specs.empty()) throw ShapeError("model needs at least one layer");
        for (const auto &g : graphs_) g.validate();
        Shape cur = input_shape_;
        for (auto &s : specs) {
            layers_.push_back(make_layer(s, cur, rng));
            cur = layers_.back()->output_shape();
        }
        name_parameters();
    }

    Model(const Model &o) : input_shape_(o.input_shape_), graphs_(o.graphs_) {
        for (const auto &l : o.layers_) layers_.push_back(l->clone());
    }
    Model &operator=(const Model &o) {
        if (this != &o) {
            Model tmp(o);
            swap(tmp);
        }
        return *this;
    }
    Model(Model &&) noexcept = default;
    Model &operator=(Model &&) noexcept = default;

    void swap(Model &o) noexcept {
        std::swap(input_shape_, o.input_shape_);
        std::swap(graphs_, o.graphs_);
        std::swap(layers_, o.layers_);
    }

    const Shape &input_shape() const { return input_shape_; }
    Shape output_shape() const { return layers_.empty() ? input_shape_ : layers_.back()->output_shape(); }
    const std::vector<AdjacencyMatrix> &graphs() const { return graphs_; }
    std::size_t layer_count() const { return layers_.size(); }
    Layer &layer(std::size_t i) { return *layers_.at(i); }
    const Layer &layer(std::size_t i) const { return *layers_.at(i); }

    std::vector<LayerSpec> specs() const {
        std::vector<LayerSpec> out;
        for (const auto &l : layers_) out.push_back(l->spec());
        return out;
    }

    Tensor forward(const Tensor &x) {
        Tensor h = x;
        for (auto &l : layers_) h = l->forward(h);
        return h;
    }

    /// Backpropagates dL/d(output); returns dL/d(input).
    Tensor backward(const Tensor &grad_out) {
        Tensor g = grad_out;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    std::vector<Parameter *> parameters() {
        std::vector<Parameter *> out;
        for (auto &l : layers_)
            for (auto *p : l->parameters()) out.push_back(p);
        return out;
    }
    std::vector<const Parameter *> parameters() const {
        std::vector<const Parameter *> out;
        for (const auto &l : layers_)
            for (const auto *p : static_cast<const Layer &>(*l).parameters()) out.push_back(p);
        return out;
    }

    Parameter *find(const std::string &name) {
        for (auto *p : parameters())
            if (p->name == name) return p;
        return nullptr;
    }

    void zero_grad() {
        for (auto *p : parameters()) p->zero_grad();
    }

    std::size_t param_count(bool trainable_only = false) const {
        std::size_t n = 0;
        for (const auto &l : layers_) n += l->param_count(trainable_only);
        return n;
    }

private:
    std::unique_ptr<Layer> make_layer(const LayerSpec &s, const Shape &in, Rng &rng) const {
        switch (s.kind) {
        case LayerKind::Dense: return std::make_unique<DenseLayer>(s, in, rng);
        case LayerKind::TTDense: return std::make_unique<TTDenseLayer>(s, in, rng);
        case LayerKind::FMGTN: return std::make_unique<FMGTNLayer>(s, in, graphs_, rng);
        case LayerKind::GMGTN: return std::make_unique<GMGTNLayer>(s, in, graphs_, rng);
        case LayerKind::GCN: return std::make_unique<GCNLayer>(s, in, graphs_, rng);
        }
        throw ShapeError("unknown layer kind");
    }

    void name_parameters() {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const std::string prefix = std::to_string(i) + "." + layer_kind_name(layers_[i]->kind()) + ".";
            for (auto *p : layers_[i]->parameters())
                if (p->name.rfind(prefix, 0) != 0) p->name = prefix + p->name;
        }
    }

    Shape input_shape_;
    std::vector<AdjacencyMatrix> graphs_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

// ---------------------------------------------------------------------------

struct LossResult {
    double loss = 0.0;
    Tensor grad;
};

/// Mean squared error over every entry, with its gradient.
inline LossResult mse_loss(const Tensor &pred, const Tensor &target) {
    if (pred.size() != target.size())
        throw ShapeError("loss: prediction " + to_string(pred.shape()) + " vs target " + to_string(target.shape()));
    LossResult r;
    r.grad = Tensor(pred.shape());
    const double n = static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        r.loss += d * d;
        r.grad[i] = 2.0 * d / n;
    }
    r.loss /= n;
    return r;
}

inline double mse(const Tensor &pred, const Tensor &target) { return mse_loss(pred, target).loss; }

inline double mae(const Tensor &pred, const Tensor &target) {
    if (pred.size() != target.size())
        throw ShapeError("mae: prediction " + to_string(pred.shape()) + " vs target " + to_string(target.shape()));
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
    return s / static_cast<double>(pred.size());
}

/// Classification accuracy on (classes, batch) tensors: argmax per sample,
/// or a 0.5 threshold when there is a single output unit.
inline double accuracy(const Tensor &pred, const Tensor &target) {
    if (pred.shape() != target.shape() || pred.order() != 2)
        throw ShapeError("accuracy expects matching (classes, batch) tensors");
    std::size_t hit = 0;
    for (std::size_t b = 0; b < pred.dim(1); ++b) {
        if (pred.dim(0) == 1) {
            hit += (pred(0, b) >= 0.5) == (target(0, b) >= 0.5);
            continue;
        }
        std::size_t ip = 0, it = 0;
        for (std::size_t c = 1; c < pred.dim(0); ++c) {
            if (pred(c, b) > pred(ip, b)) ip = c;
            if (target(c, b) > target(it, b)) it = c;
        }
        hit += ip == it;
    }
    return static_cast<double>(hit) / static_cast<double>(pred.dim(1));
}

/// Share of entries on the same side of 0.5 as the target; for several
/// independent binary outputs per sample.
inline double binary_accuracy(const Tensor &pred, const Tensor &target) {
    if (pred.size() != target.size() || pred.size() == 0)
        throw ShapeError("binary_accuracy: prediction " + to_string(pred.shape()) + " vs target " +
                         to_string(target.shape()));
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += (pred[i] >= 0.5) == (target[i] >= 0.5);
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON with the architecture, the graphs and every parameter.

namespace detail {

inline nlohmann::json tensor_json(const Tensor &t) {
    return {{"shape", t.shape()}, {"data", t.values()}};
}

inline Tensor json_tensor(const nlohmann::json &j) {
    return Tensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
}

inline nlohmann::json spec_json(const LayerSpec &s) {
    return {{"type", layer_kind_name(s.kind)},
            {"units", s.units},
            {"feature_dims", s.feature_dims},
            {"activation", activation_name(s.activation)},
            {"ranks", s.ranks},
            {"input_modes", s.input_modes},
            {"output_modes", s.output_modes},
            {"graph_mode", s.graph_mode},
            {"bias", s.bias},
            {"train_beta", s.train_beta},
            {"beta_init", s.beta_init}};
}

} // namespace detail

/// Reads a layer description; only "type" is required.
inline LayerSpec layer_spec_from_json(const nlohmann::json &j) {
    LayerSpec s;
    s.kind = parse_layer_kind(j.at("type").get<std::string>());
    s.units = j.value("units", std::size_t{0});
    s.feature_dims = j.value("feature_dims", std::vector<std::size_t>{});
    s.activation = parse_activation(j.value("activation", std::string("linear")));
    s.ranks = j.value("ranks", Ranks{});
    s.input_modes = j.value("input_modes", Shape{});
    s.output_modes = j.value("output_modes", Shape{});
    s.graph_mode = j.value("graph_mode", std::size_t{0});
    s.bias = j.value("bias", true);
    s.train_beta = j.value("train_beta", true);
    s.beta_init = j.value("beta_init", 0.5);
    return s;
}

inline nlohmann::json checkpoint_json(const Model &m) {
    nlohmann::json j;
    j["format"] = "mgtn-checkpoint";
    j["version"] = 1;
    j["input_shape"] = m.input_shape();
    for (const auto &s : m.specs()) j["layers"].push_back(detail::spec_json(s));
    j["graphs"] = nlohmann::json::array();
    for (const auto &g : m.graphs())
        j["graphs"].push_back({{"directed", g.directed}, {"nodes", g.node_names}, {"a", detail::tensor_json(g.a)}});
    for (const auto *p : m.parameters())
        j["parameters"][p->name] = {{"trainable", p->trainable}, {"value", detail::tensor_json(p->value)}};
    return j;
}

inline Model model_from_checkpoint_json(const nlohmann::json &j) {
    try {
        if (j.value("format", std::string()) != "mgtn-checkpoint") throw DataError("not an mgtn checkpoint");
        if (j.value("version", 0) != 1) throw DataError("unsupported checkpoint version");
        std::vector<LayerSpec> specs;
        for (const auto &l : j.at("layers")) specs.push_back(layer_spec_from_json(l));
        std::vector<AdjacencyMatrix> graphs;
        for (const auto &g : j.at("graphs")) {
            AdjacencyMatrix a;
            a.a = detail::json_tensor(g.at("a"));
            a.directed = g.value("directed", false);
            a.node_names = g.value("nodes", std::vector<std::string>{});
            graphs.push_back(std::move(a));
        }
        Rng rng(0);
        Model m(j.at("input_shape").get<Shape>(), specs, graphs, rng);
        const auto &params = j.at("parameters");
        for (auto *p : m.parameters()) {
            if (!params.contains(p->name)) throw DataError("checkpoint lacks parameter " + p->name);
            Tensor v = detail::json_tensor(params[p->name].at("value"));
            if (v.shape() != p->value.shape())
                throw DataError("checkpoint parameter " + p->name + " has shape " + to_string(v.shape()) + ", expected " +
                                to_string(p->value.shape()));
            p->value = std::move(v);
            p->trainable = params[p->name].value("trainable", p->trainable);
        }
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const std::string &path, const Model &m) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    f << checkpoint_json(m).dump();
}

inline Model load_checkpoint(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(path + ": " + e.what());
    }
    return model_from_checkpoint_json(j);
}

} // namespace mgtn::nn
