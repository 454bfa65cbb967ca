#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mgtn/graph.hpp"
#include "mgtn/nn/activation.hpp"
#include "mgtn/random.hpp"
#include "mgtn/tt.hpp"

namespace mgtn::nn {

/// Trainable tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;

    Parameter(std::string n, Tensor v, bool train = true)
        : name(std::move(n)), value(std::move(v)), grad(value.shape()), trainable(train) {}

    void zero_grad() { grad.fill(0.0); }
};

enum class LayerKind { FMGTN, GMGTN, TTDense, Dense, GCN };

inline std::string layer_kind_name(LayerKind k) {
    switch (k) {
    case LayerKind::FMGTN: return "fmgtn";
    case LayerKind::GMGTN: return "gmgtn";
    case LayerKind::TTDense: return "tt_dense";
    case LayerKind::Dense: return "dense";
    case LayerKind::GCN: return "gcn";
    }
    return "dense";
}

inline LayerKind parse_layer_kind(const std::string &s) {
    if (s == "fmgtn") return LayerKind::FMGTN;
    if (s == "gmgtn") return LayerKind::GMGTN;
    if (s == "tt_dense" || s == "ttdense" || s == "tt-dense") return LayerKind::TTDense;
    if (s == "dense") return LayerKind::Dense;
    if (s == "gcn") return LayerKind::GCN;
    throw ShapeError("unknown layer type '" + s + "'");
}

/// Declarative description of one layer of a model stack.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    /// Hidden units J_1 (fmgtn), J_M (gmgtn), or output size (others).
    std::size_t units = 0;
    /// gmgtn feature sizes J_1..J_M; empty means all equal to `units`.
    std::vector<std::size_t> feature_dims;
    Activation activation = Activation::Linear;
    /// tt_dense rank tuple (R_0..R_N).
    Ranks ranks;
    /// tt_dense factorizations; defaults are the incoming sample shape and a
    /// near-equal split of `units`.
    Shape input_modes;
    Shape output_modes;
    /// gcn: 1-based graph index (0 = last graph).
    std::size_t graph_mode = 0;
    bool bias = true;
    bool train_beta = true;
    double beta_init = 0.5;
};

/**
 * A differentiable layer. Inputs carry a trailing batch mode: a batch of B
 * samples of shape S is a tensor of shape (S..., B). forward() caches what
 * backward() needs; backward() accumulates parameter gradients and returns
 * the gradient with respect to the input.
 */
class Layer {
public:
    virtual ~Layer() = default;

    virtual LayerKind kind() const = 0;
    virtual Tensor forward(const Tensor &x) = 0;
    virtual Tensor backward(const Tensor &grad_out) = 0;
    virtual std::unique_ptr<Layer> clone() const = 0;

    const Shape &input_shape() const { return input_shape_; }
    const Shape &output_shape() const { return output_shape_; }
    const LayerSpec &spec() const { return spec_; }

    std::vector<Parameter *> parameters() {
        std::vector<Parameter *> out;
        for (auto &p : params_) out.push_back(&p);
        return out;
    }
    std::vector<const Parameter *> parameters() const {
        std::vector<const Parameter *> out;
        for (const auto &p : params_) out.push_back(&p);
        return out;
    }

    std::size_t param_count(bool trainable_only = false) const {
        std::size_t n = 0;
        for (const auto &p : params_)
            if (!trainable_only || p.trainable) n += p.value.size();
        return n;
    }

protected:
    Layer(LayerSpec spec, Shape in) : spec_(std::move(spec)), input_shape_(std::move(in)) {}

    std::size_t batch_of(const Tensor &x) const {
        const std::size_t per = shape_size(input_shape_);
        if (x.order() != input_shape_.size() + 1 || x.size() % per != 0 ||
            !std::equal(input_shape_.begin(), input_shape_.end(), x.shape().begin()))
            throw ShapeError(layer_kind_name(kind()) + " layer expects samples of shape " + to_string(input_shape_) +
                             " plus a batch mode, got " + to_string(x.shape()));
        return x.shape().back();
    }

    static Shape with_batch(Shape s, std::size_t batch) {
        s.push_back(batch);
        return s;
    }

    static Tensor glorot(std::size_t fan_out, std::size_t fan_in, Rng &rng) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        return random_uniform({fan_out, fan_in}, rng, -bound, bound);
    }

    LayerSpec spec_;
    Shape input_shape_;
    Shape output_shape_;
    std::vector<Parameter> params_;
};

// ---------------------------------------------------------------------------

/// y = act(W x + b) on the flattened sample.
class DenseLayer final : public Layer {
public:
    DenseLayer(LayerSpec spec, Shape in, Rng &rng) : Layer(std::move(spec), std::move(in)) {
        if (spec_.units == 0) throw ShapeError("dense layer needs units > 0");
        const std::size_t n_in = shape_size(input_shape_);
        output_shape_ = {spec_.units};
        params_.emplace_back("W", glorot(spec_.units, n_in, rng));
        if (spec_.bias) params_.emplace_back("b", Tensor({spec_.units}));
    }

    LayerKind kind() const override { return LayerKind::Dense; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

    Tensor forward(const Tensor &x) override {
        const std::size_t batch = batch_of(x);
        const std::size_t n_in = shape_size(input_shape_);
        x_ = x;
        Tensor y({spec_.units, batch});
        auto ym = as_matrix(y);
        ym.noalias() = as_matrix(params_[0].value) * as_matrix(x, n_in, batch);
        if (spec_.bias) ym.colwise() += Eigen::Map<const Eigen::VectorXd>(params_[1].value.data().data(), static_cast<Eigen::Index>(spec_.units));
        activate_inplace(y, spec_.activation);
        y_ = y;
        return y;
    }

    Tensor backward(const Tensor &grad_out) override {
        const std::size_t batch = x_.shape().back();
        const std::size_t n_in = shape_size(input_shape_);
        Tensor dz = grad_out.reshaped({spec_.units, batch});
        activation_backward_inplace(dz, y_, spec_.activation);
        const auto dzm = as_matrix(dz);
        as_matrix(params_[0].grad).noalias() += dzm * as_matrix(x_, n_in, batch).transpose();
        if (spec_.bias)
            Eigen::Map<Eigen::VectorXd>(params_[1].grad.data().data(), static_cast<Eigen::Index>(spec_.units)) +=
                dzm.rowwise().sum();
        Tensor dx(x_.shape());
        as_matrix(dx, n_in, batch).noalias() = as_matrix(params_[0].value).transpose() * dzm;
        return dx;
    }

private:
    Tensor x_, y_;
};

// ---------------------------------------------------------------------------

/// Dense layer whose weight matrix is held as a TT matrix: y = act(M x + b).
class TTDenseLayer final : public Layer {
public:
    TTDenseLayer(LayerSpec spec, Shape in, Rng &rng) : Layer(std::move(spec), std::move(in)) {
        if (spec_.units == 0) throw ShapeError("tt_dense layer needs units > 0");
        if (spec_.ranks.size() < 2) throw ShapeError("tt_dense layer needs a rank tuple (R_0..R_N)");
        const std::size_t n = spec_.ranks.size() - 1;
        if (spec_.input_modes.empty()) spec_.input_modes = input_shape_;
        if (shape_size(spec_.input_modes) != shape_size(input_shape_))
            throw ShapeError("tt_dense input factorization " + to_string(spec_.input_modes) + " does not cover samples " +
                             to_string(input_shape_));
        if (spec_.input_modes.size() != n)
            throw ShapeError("tt_dense rank tuple " + to_string_ranks(spec_.ranks) + " implies " + std::to_string(n) +
                             " cores but the input factorization " + to_string(spec_.input_modes) + " has " +
                             std::to_string(spec_.input_modes.size()) + " modes");
        if (spec_.output_modes.empty()) spec_.output_modes = factorize_near_equal(spec_.units, n);
        if (shape_size(spec_.output_modes) != spec_.units || spec_.output_modes.size() != n)
            throw ShapeError("tt_dense output factorization " + to_string(spec_.output_modes) + " does not match " +
                             std::to_string(spec_.units) + " units over " + std::to_string(n) + " cores");
        output_shape_ = {spec_.units};
        TTMatrix m = TTMatrix::glorot(spec_.input_modes, spec_.output_modes, spec_.ranks, rng);
        for (std::size_t k = 0; k < n; ++k) params_.emplace_back("core" + std::to_string(k + 1), std::move(m.cores[k]));
        if (spec_.bias) params_.emplace_back("b", Tensor({spec_.units}));
    }

    LayerKind kind() const override { return LayerKind::TTDense; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<TTDenseLayer>(*this); }

    TTMatrix matrix() const {
        TTMatrix m;
        for (std::size_t k = 0; k + 1 < spec_.ranks.size(); ++k) m.cores.push_back(params_[k].value);
        return m;
    }

    Tensor forward(const Tensor &x) override {
        const std::size_t batch = batch_of(x);
        x_shape_ = x.shape();
        Tensor y = tt_matrix_apply_batch(matrix(), x, batch, &states_);
        if (spec_.bias) {
            const Tensor &b = params_.back().value;
            for (std::size_t s = 0; s < batch; ++s)
                for (std::size_t u = 0; u < spec_.units; ++u) y(u, s) += b[u];
        }
        activate_inplace(y, spec_.activation);
        y_ = y;
        return y;
    }

    Tensor backward(const Tensor &grad_out) override {
        const std::size_t batch = x_shape_.back();
        Tensor dz = grad_out.reshaped({spec_.units, batch});
        activation_backward_inplace(dz, y_, spec_.activation);
        std::vector<Tensor> core_grads;
        Tensor dx = tt_matrix_backward_batch(matrix(), states_, dz, batch, core_grads);
        for (std::size_t k = 0; k < core_grads.size(); ++k) params_[k].grad += core_grads[k];
        if (spec_.bias) {
            Tensor &gb = params_.back().grad;
            for (std::size_t s = 0; s < batch; ++s)
                for (std::size_t u = 0; u < spec_.units; ++u) gb[u] += dz(u, s);
        }
        return dx.reshaped(x_shape_);
    }

private:
    Shape x_shape_;
    std::vector<Tensor> states_;
    Tensor y_;
};

// ---------------------------------------------------------------------------

namespace detail {

inline void check_graphs(const std::vector<AdjacencyMatrix> &graphs, const Shape &in, const char *who) {
    if (graphs.empty()) throw ShapeError(std::string(who) + " layer needs at least one graph");
    if (in.size() != graphs.size() + 1)
        throw ShapeError(std::string(who) + " layer: samples " + to_string(in) + " need " + std::to_string(in.size() - 1) +
                         " graphs (one per physical mode), got " + std::to_string(graphs.size()));
    for (std::size_t m = 0; m < graphs.size(); ++m)
        if (graphs[m].nodes() != in[m + 1])
            throw ShapeError(std::string(who) + " layer: graph " + std::to_string(m + 1) + " has " +
                             std::to_string(graphs[m].nodes()) + " nodes but input mode " + std::to_string(m + 2) +
                             " has size " + std::to_string(in[m + 1]));
}

} // namespace detail

/**
 * Fast multi-graph layer. For samples X of shape (J0, I_1..I_M):
 *
 *   Y = act(F_M x_2^{M+1} ... F_1 x_2^2 (W x_2^1 X)),  F_m = I + beta_m A_m,
 *
 * i.e. one shared feature transform followed by a graph shift on every
 * physical mode. Output shape (J1, I_1..I_M).
 */
class FMGTNLayer final : public Layer {
public:
    FMGTNLayer(LayerSpec spec, Shape in, std::vector<AdjacencyMatrix> graphs, Rng &rng)
        : Layer(std::move(spec), std::move(in)) {
        detail::check_graphs(graphs, input_shape_, "fmgtn");
        if (spec_.units == 0) throw ShapeError("fmgtn layer needs units > 0");
        for (auto &g : graphs) adj_.push_back(g.a);
        output_shape_ = input_shape_;
        output_shape_[0] = spec_.units;
        params_.emplace_back("W", glorot(spec_.units, input_shape_[0], rng));
        for (std::size_t m = 0; m < adj_.size(); ++m)
            params_.emplace_back("beta" + std::to_string(m + 1), Tensor::scalar(spec_.beta_init), spec_.train_beta);
    }

    LayerKind kind() const override { return LayerKind::FMGTN; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<FMGTNLayer>(*this); }

    std::size_t graph_count() const { return adj_.size(); }
    const Tensor &adjacency(std::size_t m) const { return adj_.at(m); }
    double beta(std::size_t m) const { return params_[1 + m].value[0]; }

    Tensor forward(const Tensor &x) override {
        batch_of(x);
        x_ = x;
        Tensor z = mode_product(x, params_[0].value, 1);
        shifted_.clear();
        for (std::size_t m = 0; m < adj_.size(); ++m) {
            Tensor az = mode_product(z, adj_[m], m + 2);
            z.add_scaled(az, beta(m));
            shifted_.push_back(std::move(az));
        }
        activate_inplace(z, spec_.activation);
        y_ = z;
        return z;
    }

    Tensor backward(const Tensor &grad_out) override {
        Tensor d = grad_out;
        activation_backward_inplace(d, y_, spec_.activation);
        for (std::size_t m = adj_.size(); m-- > 0;) {
            params_[1 + m].grad[0] += dot(d, shifted_[m]);
            d.add_scaled(mode_product(d, transpose(adj_[m]), m + 2), beta(m));
        }
        params_[0].grad += mode_gram(d, x_, 1);
        return mode_product(d, transpose(params_[0].value), 1);
    }

private:
    std::vector<Tensor> adj_;
    Tensor x_, y_;
    std::vector<Tensor> shifted_;
};

/**
 * General multi-graph layer. For m = 1..M:
 *
 *   Y <- F_m x_{3,4}^{1,m+1} (W_m x_2^1 Y),  F_m = tensorize(I + beta_m (A_m kron P_m)),
 *
 * with W_m: J_m x J_{m-1} and P_m: J_m x J_m; the activation is applied once
 * at the end. The filter is applied as Z + beta_m (P_m x_1 A_m x_{m+1} Z),
 * which equals the order-4 contraction without materialising F_m.
 */
class GMGTNLayer final : public Layer {
public:
    GMGTNLayer(LayerSpec spec, Shape in, std::vector<AdjacencyMatrix> graphs, Rng &rng)
        : Layer(std::move(spec), std::move(in)) {
        detail::check_graphs(graphs, input_shape_, "gmgtn");
        const std::size_t nm = graphs.size();
        if (spec_.feature_dims.empty()) {
            if (spec_.units == 0) throw ShapeError("gmgtn layer needs units > 0");
            spec_.feature_dims.assign(nm, spec_.units);
        }
        if (spec_.feature_dims.size() != nm)
            throw ShapeError("gmgtn layer needs " + std::to_string(nm) + " feature sizes, got " +
                             std::to_string(spec_.feature_dims.size()));
        spec_.units = spec_.feature_dims.back();
        for (auto &g : graphs) adj_.push_back(g.a);
        output_shape_ = input_shape_;
        output_shape_[0] = spec_.units;
        std::normal_distribution<double> noise(0.0, 0.01);
        std::size_t prev = input_shape_[0];
        for (std::size_t m = 0; m < nm; ++m) {
            const std::size_t j = spec_.feature_dims[m];
            const std::string s = std::to_string(m + 1);
            params_.emplace_back("W" + s, glorot(j, prev, rng));
            Tensor p = Tensor::identity(j);
            for (double &v : p.data()) v += noise(rng);
            params_.emplace_back("P" + s, std::move(p));
            params_.emplace_back("beta" + s, Tensor::scalar(spec_.beta_init), spec_.train_beta);
            prev = j;
        }
    }

    LayerKind kind() const override { return LayerKind::GMGTN; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<GMGTNLayer>(*this); }

    std::size_t graph_count() const { return adj_.size(); }
    const Tensor &adjacency(std::size_t m) const { return adj_.at(m); }
    const Tensor &weight(std::size_t m) const { return params_[3 * m].value; }
    const Tensor &propagation(std::size_t m) const { return params_[3 * m + 1].value; }
    double beta(std::size_t m) const { return params_[3 * m + 2].value[0]; }

    Tensor forward(const Tensor &x) override {
        batch_of(x);
        inputs_.clear();
        mixed_.clear();
        filtered_.clear();
        Tensor y = x;
        for (std::size_t m = 0; m < adj_.size(); ++m) {
            Tensor z = mode_product(y, weight(m), 1);
            Tensor v = mode_product(mode_product(z, propagation(m), 1), adj_[m], m + 2);
            inputs_.push_back(std::move(y));
            y = z;
            y.add_scaled(v, beta(m));
            mixed_.push_back(std::move(z));
            filtered_.push_back(std::move(v));
        }
        activate_inplace(y, spec_.activation);
        y_ = y;
        return y;
    }

    Tensor backward(const Tensor &grad_out) override {
        Tensor d = grad_out;
        activation_backward_inplace(d, y_, spec_.activation);
        for (std::size_t m = adj_.size(); m-- > 0;) {
            Parameter &w = params_[3 * m], &p = params_[3 * m + 1], &b = params_[3 * m + 2];
            b.grad[0] += dot(d, filtered_[m]);
            Tensor du = mode_product(d * beta(m), transpose(adj_[m]), m + 2);
            p.grad += mode_gram(du, mixed_[m], 1);
            Tensor dz = d + mode_product(du, transpose(p.value), 1);
            w.grad += mode_gram(dz, inputs_[m], 1);
            d = mode_product(dz, transpose(w.value), 1);
        }
        return d;
    }

private:
    std::vector<Tensor> adj_;
    std::vector<Tensor> inputs_, mixed_, filtered_;
    Tensor y_;
};

// ---------------------------------------------------------------------------

/// One-graph GCN baseline: the sample is unfolded along graph mode m into
/// X (I_m x F) and mapped to act(S X W + b) of shape (I_m, units), where
/// S = D~^{-1/2} (A + I) D~^{-1/2} is the renormalised adjacency.
class GCNLayer final : public Layer {
public:
    GCNLayer(LayerSpec spec, Shape in, const std::vector<AdjacencyMatrix> &graphs, Rng &rng)
        : Layer(std::move(spec), std::move(in)) {
        if (graphs.empty()) throw ShapeError("gcn layer needs a graph");
        if (spec_.units == 0) throw ShapeError("gcn layer needs units > 0");
        if (spec_.graph_mode == 0) spec_.graph_mode = graphs.size();
        if (spec_.graph_mode > graphs.size() || spec_.graph_mode + 1 > input_shape_.size())
            throw ShapeError("gcn graph mode " + std::to_string(spec_.graph_mode) + " out of range");
        const AdjacencyMatrix &g = graphs[spec_.graph_mode - 1];
        mode_ = spec_.graph_mode + 1;
        if (g.nodes() != input_shape_[mode_ - 1])
            throw ShapeError("gcn graph has " + std::to_string(g.nodes()) + " nodes but input mode " +
                             std::to_string(mode_) + " has size " + std::to_string(input_shape_[mode_ - 1]));
        AdjacencyMatrix loops = g;
        for (std::size_t i = 0; i < g.nodes(); ++i) loops.a(i, i) += 1.0;
        support_ = degree_and_normalize(loops).a;
        nodes_ = g.nodes();
        features_ = shape_size(input_shape_) / nodes_;
        output_shape_ = {nodes_, spec_.units};
        params_.emplace_back("W", glorot(features_, spec_.units, rng).reshaped({features_, spec_.units}));
        if (spec_.bias) params_.emplace_back("b", Tensor({spec_.units}));
    }

    LayerKind kind() const override { return LayerKind::GCN; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<GCNLayer>(*this); }

    Tensor forward(const Tensor &x) override {
        const std::size_t batch = batch_of(x);
        x_shape_ = x.shape();
        h_ = matmul(support_, matricize(x, mode_)); // (I, F*B)
        Tensor y({nodes_, spec_.units, batch});
        const auto w = as_matrix(params_[0].value);
        for (std::size_t s = 0; s < batch; ++s) {
            ConstMatrixMap hs(h_.data().data() + s * nodes_ * features_, static_cast<Eigen::Index>(nodes_),
                              static_cast<Eigen::Index>(features_));
            MatrixMap ys(y.data().data() + s * nodes_ * spec_.units, static_cast<Eigen::Index>(nodes_),
                         static_cast<Eigen::Index>(spec_.units));
            ys.noalias() = hs * w;
            if (spec_.bias)
                ys.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(params_[1].value.data().data(),
                                                                     static_cast<Eigen::Index>(spec_.units));
        }
        activate_inplace(y, spec_.activation);
        y_ = y;
        return y;
    }

    Tensor backward(const Tensor &grad_out) override {
        const std::size_t batch = x_shape_.back();
        Tensor dz = grad_out.reshaped({nodes_, spec_.units, batch});
        activation_backward_inplace(dz, y_, spec_.activation);
        const auto w = as_matrix(params_[0].value);
        auto gw = as_matrix(params_[0].grad);
        Tensor dh(h_.shape());
        for (std::size_t s = 0; s < batch; ++s) {
            ConstMatrixMap hs(h_.data().data() + s * nodes_ * features_, static_cast<Eigen::Index>(nodes_),
                              static_cast<Eigen::Index>(features_));
            ConstMatrixMap ds(dz.data().data() + s * nodes_ * spec_.units, static_cast<Eigen::Index>(nodes_),
                              static_cast<Eigen::Index>(spec_.units));
            MatrixMap dhs(dh.data().data() + s * nodes_ * features_, static_cast<Eigen::Index>(nodes_),
                          static_cast<Eigen::Index>(features_));
            gw.noalias() += hs.transpose() * ds;
            dhs.noalias() = ds * w.transpose();
            if (spec_.bias)
                Eigen::Map<Eigen::RowVectorXd>(params_[1].grad.data().data(), static_cast<Eigen::Index>(spec_.units)) +=
                    ds.colwise().sum();
        }
        return tensorize(matmul(transpose(support_), dh), x_shape_, mode_);
    }

private:
    Tensor support_;
    std::size_t mode_ = 2, nodes_ = 0, features_ = 0;
    Shape x_shape_;
    Tensor h_, y_;
};

} // namespace mgtn::nn
