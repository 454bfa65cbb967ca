#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mgtn/cli/config.hpp"
#include "mgtn/data/dataset.hpp"
#include "mgtn/data/loaders.hpp"
#include "mgtn/data/synth.hpp"
#include "mgtn/graph.hpp"
#include "mgtn/nn/model.hpp"
#include "mgtn/nn/optim.hpp"
#include "mgtn/nn/param_count.hpp"
#include "mgtn/nn/trainer.hpp"
#include "mgtn/trade/dqn.hpp"

namespace mgtn::cli {

// ---------------------------------------------------------------------------
// Synthetic data

namespace detail {

template <class T> void read_opt(const json &o, const char *key, T &field) {
    if (o.contains(key)) field = o.at(key).get<T>();
}

inline void check_keys(const json &o, std::initializer_list<const char *> keys) {
    for (const auto &[k, v] : o.items()) {
        bool ok = false;
        for (const char *a : keys) ok = ok || k == a;
        if (!ok) throw ConfigError("'data.synthetic." + k + "' is not a known option for this generator");
    }
}

} // namespace detail

/// Generator tables for an experiment kind from `data.synthetic` options.
inline data::SynthTables synth_for(const std::string &kind, std::uint64_t seed, const json &o) {
    try {
        if (kind == "trade") {
            detail::check_keys(o, {"currencies", "steps", "noise", "drift_scale", "jitter", "carry", "carry_quote_scale"});
            data::FxSynthOptions f;
            detail::read_opt(o, "currencies", f.currencies);
            detail::read_opt(o, "steps", f.steps);
            detail::read_opt(o, "noise", f.noise);
            detail::read_opt(o, "drift_scale", f.drift_scale);
            detail::read_opt(o, "jitter", f.jitter);
            detail::read_opt(o, "carry", f.carry);
            detail::read_opt(o, "carry_quote_scale", f.carry_quote_scale);
            if (!f.carry.empty() && !o.contains("currencies")) f.currencies = f.carry.size();
            return data::synth_fx(seed, f);
        }
        if (kind == "eeg") {
            detail::check_keys(o, {"subjects", "videos", "seconds", "separation"});
            data::EegSynthOptions e;
            detail::read_opt(o, "subjects", e.subjects);
            detail::read_opt(o, "videos", e.videos);
            detail::read_opt(o, "seconds", e.seconds);
            detail::read_opt(o, "separation", e.separation);
            return data::synth_eeg(seed, e);
        }
        if (kind == "temperature") {
            detail::check_keys(o, {"cities", "months", "noise", "missing"});
            data::TemperatureSynthOptions t;
            detail::read_opt(o, "cities", t.cities);
            detail::read_opt(o, "months", t.months);
            detail::read_opt(o, "noise", t.noise);
            detail::read_opt(o, "missing", t.missing);
            return data::synth_temperature(seed, t);
        }
        if (kind == "airquality") {
            detail::check_keys(o, {"stations", "hours", "shared", "persistence"});
            data::AirQualitySynthOptions a;
            detail::read_opt(o, "stations", a.stations);
            detail::read_opt(o, "hours", a.hours);
            detail::read_opt(o, "shared", a.shared);
            detail::read_opt(o, "persistence", a.persistence);
            return data::synth_airquality(seed, a);
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("data.synthetic: ") + e.what());
    }
    throw ConfigError("no synthetic generator for experiment '" + kind + "'");
}

/// Data file paths by role; synthetic sources are generated into `scratch`.
inline std::map<std::string, std::vector<std::string>> resolve_data_paths(const ExperimentConfig &c,
                                                                           const std::string &scratch) {
    if (c.data.source == "files") return c.data.paths;
    const auto tables = synth_for(c.kind, SeedSequence(c.seed).stream_seed("synth"), c.data.synthetic);
    data::write_synth(tables, scratch);
    const auto at = [&](const char *name) { return (std::filesystem::path(scratch) / name).string(); };
    if (c.kind == "trade") return {{"fx", {at("fx.csv")}}, {"carry", {at("carry.csv")}}};
    if (c.kind == "eeg") return {{"eeg", {at("EEG_data.csv")}}, {"demographics", {at("demographic_info.csv")}}};
    if (c.kind == "temperature") return {{"temperature", {at("temperature.csv")}}};
    return {{"airquality", {at("airquality.csv")}}};
}

// ---------------------------------------------------------------------------
// Data preparation

/// Node attributes that graph builders may draw on, per graph mode.
struct GraphContext {
    std::vector<std::vector<double>> features;
    std::vector<std::vector<double>> series;
    std::optional<data::CarryQuotes> carry;
    std::vector<std::string> names;
};

inline AdjacencyMatrix build_graph(const GraphConfig &g, std::size_t mode, std::size_t nodes, const GraphContext &ctx) {
    const std::string who = "graphs." + std::to_string(mode - 1) + " (" + g.builder + ")";
    AdjacencyMatrix a;
    if (g.builder == "time") {
        a = build_time_graph(nodes, {g.bidirectional, g.decay, g.hops});
    } else if (g.builder == "kernel") {
        if (ctx.features.empty()) throw ConfigError(who + ": this mode has no node attributes for a kernel graph");
        a = build_kernel_graph(ctx.features, g.sigma);
    } else if (g.builder == "correlation") {
        if (ctx.series.empty()) throw ConfigError(who + ": this mode has no node series for a correlation graph");
        a = build_correlation_graph(ctx.series, ctx.names);
    } else if (g.builder == "carry") {
        if (!ctx.carry) throw ConfigError(who + ": carry graphs need forward and spot quotes");
        a = build_carry_graph(ctx.carry->spot, ctx.carry->forward,
                              g.carry_mode == "abs" ? CarryMode::Absolute : CarryMode::Relu);
    } else {
        a = read_adjacency_csv(g.path, g.directed);
    }
    if (a.nodes() != nodes)
        throw ConfigError(who + ": graph has " + std::to_string(a.nodes()) + " nodes but mode " +
                          std::to_string(mode + 1) + " has size " + std::to_string(nodes));
    if (a.node_names.empty() && !ctx.names.empty() && ctx.names.size() == nodes) a.node_names = ctx.names;
    return g.normalize ? degree_and_normalize(a) : a;
}

/// Windowed, split and standardised samples with their graphs.
struct PreparedData {
    data::SampleSet samples;
    data::Split split;
    std::vector<AdjacencyMatrix> graphs;
    bool classification = false;
    /// Targets before scaling (trading rewards, regression reporting).
    Tensor raw_targets;
    std::optional<data::Standardizer> target_scaler;
    std::vector<std::string> currencies;
    std::vector<std::string> notes;
};

namespace detail {

/// Z-scores every input feature with statistics of the first `train` samples.
inline void standardize_inputs(data::SampleSet &s, std::size_t train) {
    const std::size_t j0 = s.inputs.dim(0), per = s.inputs.size() / j0 / s.size();
    const Tensor flat = s.inputs.reshaped({j0, per * s.size()});
    data::Standardizer z;
    z.fit(flat, per * train);
    s.inputs = z.transform(flat).reshaped(s.inputs.shape());
}

inline std::vector<std::vector<double>> zscore_columns(std::vector<std::vector<double>> rows) {
    if (rows.empty()) return rows;
    for (std::size_t k = 0; k < rows.front().size(); ++k) {
        double m = 0, v = 0;
        for (const auto &r : rows) m += r[k];
        m /= static_cast<double>(rows.size());
        for (const auto &r : rows) v += (r[k] - m) * (r[k] - m);
        const double sd = std::sqrt(v / static_cast<double>(rows.size()));
        for (auto &r : rows) r[k] = sd > 1e-12 ? (r[k] - m) / sd : 0.0;
    }
    return rows;
}

inline data::Split split_for(const ExperimentConfig &c, const data::SampleSet &s) {
    if (c.kind == "trade") {
        if (c.trade.train_days) return data::split_by_days(s.timestamps, *c.trade.train_days);
        return data::chronological_split(s.size(), c.training.train_fraction, 0.0);
    }
    return data::chronological_split(s.size(), c.training.train_fraction, c.training.val_fraction);
}

inline void check_layout(const ExperimentConfig &c, const data::SampleSet &s) {
    const Shape shape = s.sample_shape();
    if (c.layout.features && *c.layout.features != shape[0])
        throw ConfigError("layout.features is " + std::to_string(*c.layout.features) + " but the data has " +
                          std::to_string(shape[0]) + " features");
    if (!c.layout.modes.empty() && Shape(shape.begin() + 1, shape.end()) != c.layout.modes)
        throw ConfigError("layout.modes is " + to_string(c.layout.modes) + " but the data samples are " +
                          to_string(shape));
    if (c.graphs.size() + 1 != shape.size())
        throw ConfigError("config lists " + std::to_string(c.graphs.size()) + " graphs but samples " + to_string(shape) +
                          " have " + std::to_string(shape.size() - 1) + " graph modes");
}

} // namespace detail

inline PreparedData prepare_data(const ExperimentConfig &c, const std::map<std::string, std::vector<std::string>> &paths) {
    const auto path = [&](const char *role) -> std::string {
        auto it = paths.find(role);
        if (it == paths.end() || it->second.empty()) throw ConfigError(std::string("data.paths.") + role + " is required");
        return it->second.front();
    };
    PreparedData d;
    GraphContext entity;
    const std::size_t w = c.layout.window, h = c.layout.horizon;
    if (c.kind == "trade") {
        auto fx = data::load_fx(path("fx"), c.data.entities);
        d.samples = data::window_tensorize(fx.panel, w, h == 0 ? 1 : h);
        d.currencies = fx.currencies;
        entity.carry = data::load_carry(path("carry"), fx.currencies);
        entity.names = fx.currencies;
    } else if (c.kind == "eeg") {
        std::string demo;
        if (auto it = paths.find("demographics"); it != paths.end() && !it->second.empty()) demo = it->second.front();
        auto eeg = data::load_eeg(path("eeg"), demo, c.data.entities);
        std::vector<data::SampleSet> parts;
        for (const auto &v : eeg.videos) {
            if (data::window_count(v.steps(), w, h) == 0) {
                d.notes.push_back("video with " + std::to_string(v.steps()) + " steps is shorter than one window");
                continue;
            }
            parts.push_back(data::window_tensorize(v, w, h));
        }
        d.samples = data::concatenate(parts);
        d.classification = true;
        entity.features = detail::zscore_columns(eeg.demographics);
        entity.names = eeg.subjects;
    } else if (c.kind == "temperature") {
        data::TemperatureOptions o;
        o.country = c.data.country;
        o.cities = c.data.cities;
        o.max_steps = c.data.max_steps;
        auto t = data::load_temperature(path("temperature"), o);
        d.samples = data::window_tensorize(t.panel, w, h);
        entity.features = t.coordinates;
        entity.names = t.panel.entities;
    } else {
        data::AirQualityOptions o;
        o.stations = c.data.entities;
        o.max_steps = c.data.max_steps;
        auto it = paths.find("airquality");
        if (it == paths.end() || it->second.empty()) throw ConfigError("data.paths.airquality is required");
        auto a = data::load_airquality(it->second, o);
        if (a.unseen_wind_directions)
            d.notes.push_back(std::to_string(a.unseen_wind_directions) + " unrecognised wind directions encoded as zeros");
        d.samples = data::window_tensorize(a.panel, w, h);
        // PM2.5 series of the training steps for the correlation graph.
        const std::size_t n_fit = detail::split_for(c, d.samples).train_end + w - 1;
        for (std::size_t s = 0; s < a.panel.x.dim(2); ++s) {
            std::vector<double> v;
            for (std::size_t t = 0; t < std::min(n_fit, a.panel.steps()); ++t) v.push_back(a.panel.x(0, t, s));
            entity.series.push_back(std::move(v));
        }
        entity.names = a.panel.entities;
    }
    d.samples.validate();
    detail::check_layout(c, d.samples);
    d.split = detail::split_for(c, d.samples);
    d.raw_targets = d.samples.targets;
    detail::standardize_inputs(d.samples, d.split.train_end);
    if (c.kind != "trade" && !d.classification) {
        data::Standardizer z;
        z.fit(d.samples.targets, d.split.train_end);
        d.samples.targets = z.transform(d.samples.targets);
        d.target_scaler = z;
    }
    const Shape shape = d.samples.sample_shape();
    for (std::size_t m = 1; m < shape.size(); ++m)
        d.graphs.push_back(build_graph(c.graphs[m - 1], m, shape[m], m == 1 ? GraphContext{} : entity));
    return d;
}

inline nn::Model build_model(const ExperimentConfig &c, const Shape &sample_shape, std::vector<AdjacencyMatrix> graphs,
                             Rng &rng) {
    try {
        return nn::Model(sample_shape, c.layers, std::move(graphs), rng);
    } catch (const ShapeError &e) {
        throw ConfigError(std::string("layers: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Parameter counts

struct ParamRow {
    std::string layer;
    std::size_t params = 0;
    /// Closed-form count for graph layers (0 when not applicable).
    std::size_t closed_form = 0;
    /// Dense map on the matricized input, cheapest graph mode.
    std::size_t matricized_dense = 0;
};

inline std::vector<ParamRow> param_table(const nn::Model &m) {
    std::vector<ParamRow> rows;
    Shape in = m.input_shape();
    for (std::size_t i = 0; i < m.layer_count(); ++i) {
        const nn::Layer &l = m.layer(i);
        ParamRow r{std::to_string(i) + "." + nn::layer_kind_name(l.kind()), l.param_count(), 0, 0};
        const Shape graphs(in.begin() + 1, in.end());
        if (l.kind() == nn::LayerKind::FMGTN) {
            r.closed_form = nn::fmgtn_param_count(in[0], l.output_shape()[0], graphs.size());
            r.matricized_dense = std::numeric_limits<std::size_t>::max();
            for (std::size_t mode = 1; mode <= graphs.size(); ++mode)
                r.matricized_dense = std::min(
                    r.matricized_dense, nn::matricized_dense_param_count(in[0], l.output_shape()[0], graphs, mode));
        } else if (l.kind() == nn::LayerKind::GMGTN) {
            std::vector<std::size_t> dims{in[0]};
            for (const auto &d : l.spec().feature_dims) dims.push_back(d);
            r.closed_form = nn::gmgtn_param_count(dims);
        }
        rows.push_back(r);
        in = l.output_shape();
    }
    return rows;
}

inline json param_json(const nn::Model &m) {
    json layers = json::array();
    for (const auto &r : param_table(m)) {
        json j{{"layer", r.layer}, {"params", r.params}};
        if (r.closed_form) j["closed_form"] = r.closed_form;
        if (r.matricized_dense) j["matricized_dense"] = r.matricized_dense;
        layers.push_back(j);
    }
    return {{"total", m.param_count()}, {"layers", layers}};
}

inline std::string param_report(const nn::Model &m) {
    std::ostringstream os;
    os << "layer            params   closed-form   matricized-dense\n";
    for (const auto &r : param_table(m)) {
        char line[128];
        std::snprintf(line, sizeof line, "%-14s %8zu   %11s   %16s\n", r.layer.c_str(), r.params,
                      r.closed_form ? std::to_string(r.closed_form).c_str() : "-",
                      r.matricized_dense ? std::to_string(r.matricized_dense).c_str() : "-");
        os << line;
    }
    os << "total NP " << m.param_count() << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Supervised training

struct TrainOutcome {
    json metrics;
    std::vector<nn::EpochRecord> curves;
    std::string report;
    nn::Model model;
};

namespace detail {

/// Error and accuracy figures of predictions against targets.
inline json score(const PreparedData &d, const Tensor &pred, const Tensor &target, std::size_t begin,
                  std::size_t end) {
    json j{{"samples", end - begin}, {"mse", nn::mse(pred, target)}};
    if (d.classification) {
        j["accuracy_pct"] = 100.0 * nn::binary_accuracy(pred, target);
    } else {
        // Squared error on targets min-max scaled by the training range, in percent.
        const Tensor raw = data::SampleSet::slice_last(d.raw_targets, begin, end);
        const Tensor pr = d.target_scaler->inverse(pred);
        const Tensor fit = data::SampleSet::slice_last(d.raw_targets, 0, d.split.train_end);
        const auto [lo, hi] = std::minmax_element(fit.values().begin(), fit.values().end());
        const double range = *hi > *lo ? *hi - *lo : 1.0;
        double s = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) s += std::pow((pr[i] - raw[i]) / range, 2);
        j["mse_pct"] = 100.0 * s / static_cast<double>(raw.size());
        j["mae"] = nn::mae(pr, raw);
    }
    return j;
}

/// Test MSE of predicting each target row's training mean.
inline double mean_predictor_mse(const Tensor &targets, std::size_t train_end, std::size_t begin, std::size_t end) {
    const std::size_t k = targets.dim(0);
    std::vector<double> mean(k, 0.0);
    for (std::size_t n = 0; n < train_end; ++n)
        for (std::size_t r = 0; r < k; ++r) mean[r] += targets(r, n) / static_cast<double>(train_end);
    double s = 0.0;
    for (std::size_t n = begin; n < end; ++n)
        for (std::size_t r = 0; r < k; ++r) s += std::pow(targets(r, n) - mean[r], 2);
    return s / static_cast<double>(k * (end - begin));
}

} // namespace detail

using EpochCallback = std::function<void(const nn::EpochRecord &)>;

inline TrainOutcome run_train(const ExperimentConfig &c, const PreparedData &d, const EpochCallback &on_epoch = {}) {
    if (c.kind == "trade") throw ConfigError("experiment 'trade' runs with the trade command");
    const SeedSequence seeds(c.seed);
    Rng init = seeds.stream("init"), shuffle = seeds.stream("shuffle");
    nn::Model model = build_model(c, d.samples.sample_shape(), d.graphs, init);
    if (model.output_shape() != Shape{d.samples.targets.dim(0)})
        throw ConfigError("layers: the model outputs " + to_string(model.output_shape()) + " but the targets have " +
                          std::to_string(d.samples.targets.dim(0)) + " rows");
    auto opt = nn::make_optimizer(c.optimizer.kind, c.optimizer.learning_rate);
    const auto &s = d.split;
    const data::SampleSet train = d.samples.slice(0, s.train_end);
    std::optional<data::SampleSet> val;
    if (s.val() > 0) val = d.samples.slice(s.train_end, s.val_end);
    const data::SampleSet test = d.samples.slice(s.val_end, s.total);

    nn::TrainOptions to{c.training.epochs, c.training.batch_size, c.training.shuffle};
    TrainOutcome out;
    out.curves = nn::fit(model, *opt, train.inputs, train.targets, to, shuffle, val ? &val->inputs : nullptr,
                         val ? &val->targets : nullptr, [&](const nn::EpochRecord &r) {
                             if (on_epoch) on_epoch(r);
                             return true;
                         });
    json m;
    m["experiment"] = c.kind;
    m["seed"] = c.seed;
    m["task"] = d.classification ? "classification" : "regression";
    m["np"] = param_json(model);
    m["epochs"] = out.curves.size();
    m["final_train_loss"] = out.curves.empty() ? 0.0 : out.curves.back().train_loss;
    m["train"] = detail::score(d, nn::predict(model, train.inputs), train.targets, 0, s.train_end);
    if (val) m["val"] = detail::score(d, nn::predict(model, val->inputs), val->targets, s.train_end, s.val_end);
    m["test"] = detail::score(d, nn::predict(model, test.inputs), test.targets, s.val_end, s.total);
    if (!d.classification)
        m["test_mean_predictor_mse"] = detail::mean_predictor_mse(d.samples.targets, s.train_end, s.val_end, s.total);
    if (!d.notes.empty()) m["notes"] = d.notes;
    out.metrics = m;

    std::ostringstream os;
    os << "experiment  " << c.kind << " (" << m["task"].get<std::string>() << ")\n";
    os << "seed        " << c.seed << "\n";
    os << "samples     " << to_string(d.samples.sample_shape()) << " x " << d.samples.size() << " (train "
       << s.train() << ", val " << s.val() << ", test " << s.test() << ")\n";
    os << "optimizer   " << c.optimizer.kind << " lr " << format_number(c.optimizer.learning_rate) << ", batch "
       << c.training.batch_size << ", epochs " << out.curves.size() << "\n\n";
    os << param_report(model) << "\n";
    const char *key = d.classification ? "accuracy_pct" : "mse_pct";
    os << (d.classification ? "TRA (%) " : "TRMSE (%) ") << format_number(m["train"][key].get<double>()) << "\n";
    os << (d.classification ? "TEA (%) " : "TEMSE (%) ") << format_number(m["test"][key].get<double>()) << "\n";
    if (!d.classification)
        os << "test MSE " << format_number(m["test"]["mse"].get<double>()) << " vs train-mean predictor "
           << format_number(m["test_mean_predictor_mse"].get<double>()) << " (standardised units)\n";
    for (const auto &n : d.notes) os << "note: " << n << "\n";
    out.report = os.str();
    out.model = std::move(model);
    return out;
}

// ---------------------------------------------------------------------------
// Trading

struct CurrencyRun {
    std::string currency;
    std::vector<trade::EpisodeLog> episodes;
    trade::Evaluation in_sample;
    trade::Evaluation out_of_sample;
};

struct TradeOutcome {
    json metrics;
    std::vector<CurrencyRun> runs;
    std::string report;
    std::size_t np = 0;
};

inline json metrics_json(const trade::FinancialMetrics &f) {
    return {{"tr_pct", f.tr}, {"sr", f.sr}, {"sr_degenerate", f.sr_degenerate}, {"md_pct", f.md}, {"hr_pct", f.hr},
            {"steps", f.steps}};
}

using EpisodeCallback = std::function<void(const std::string &, const trade::EpisodeLog &)>;

inline TradeOutcome run_trade(const ExperimentConfig &c, const PreparedData &d, const EpisodeCallback &on_episode = {}) {
    if (c.kind != "trade") throw ConfigError("the trade command needs experiment 'trade', got '" + c.kind + "'");
    std::vector<std::string> traded = c.trade.currencies;
    if (traded.empty()) traded.push_back(d.currencies.front());
    const SeedSequence seeds(c.seed);
    const auto &s = d.split;
    data::SampleSet all = d.samples;
    all.targets = d.raw_targets;
    const data::SampleSet train = all.slice(0, s.train_end), test = all.slice(s.val_end, s.total);
    TradeOutcome out;
    json per = json::object();
    trade::FinancialMetrics mean_in, mean_out;
    for (const auto &cur : traded) {
        const auto it = std::find(d.currencies.begin(), d.currencies.end(), cur);
        if (it == d.currencies.end()) throw ConfigError("trade.currencies: '" + cur + "' is not in the data");
        const auto idx = static_cast<std::size_t>(it - d.currencies.begin());
        Rng init = seeds.stream("init." + cur), explore = seeds.stream("explore." + cur),
            replay = seeds.stream("replay." + cur);
        nn::Model q = build_model(c, d.samples.sample_shape(), d.graphs, init);
        out.np = q.param_count();
        trade::DqnAgent agent(std::move(q), c.trade.dqn);
        auto env_train = trade::MarketEnv::from_targets(train, idx, c.trade.cost);
        auto env_test = trade::MarketEnv::from_targets(test, idx, c.trade.cost);
        CurrencyRun run{cur, {}, {}, {}};
        run.episodes = trade::train_dqn(env_train, agent, explore, replay, [&](const trade::EpisodeLog &l) {
            if (on_episode) on_episode(cur, l);
        });
        run.in_sample = trade::evaluate_greedy(env_train, agent);
        run.out_of_sample = trade::evaluate_greedy(env_test, agent);
        std::size_t buys = 0;
        for (int a : run.out_of_sample.actions) buys += a == trade::Buy;
        per[cur] = {{"in_sample", metrics_json(run.in_sample.metrics)},
                    {"out_of_sample", metrics_json(run.out_of_sample.metrics)},
                    {"out_of_sample_buy_share", static_cast<double>(buys) / static_cast<double>(env_test.length())},
                    {"updates", agent.updates()}};
        for (auto [dst, src] : {std::pair{&mean_in, &run.in_sample.metrics}, std::pair{&mean_out, &run.out_of_sample.metrics}}) {
            const double k = 1.0 / static_cast<double>(traded.size());
            dst->tr += k * src->tr;
            dst->sr += k * src->sr;
            dst->md += k * src->md;
            dst->hr += k * src->hr;
            dst->steps = src->steps;
        }
        out.runs.push_back(std::move(run));
    }
    json m;
    m["experiment"] = "trade";
    m["seed"] = c.seed;
    m["np"] = out.np;
    m["currencies"] = per;
    m["mean"] = {{"in_sample", metrics_json(mean_in)}, {"out_of_sample", metrics_json(mean_out)}};
    m["samples"] = {{"train", s.train()}, {"test", s.test()}};
    out.metrics = m;

    std::ostringstream os;
    os << "experiment  trade, seed " << c.seed << "\n";
    os << "samples     " << to_string(d.samples.sample_shape()) << " x " << d.samples.size() << " (train "
       << s.train() << ", test " << s.test() << ")\n";
    os << "episodes    " << c.trade.dqn.episodes << ", NP " << out.np << "\n\n";
    os << "currency  period          TR (%)        SR          MD (%)      HR (%)\n";
    const auto row = [&](const std::string &name, const char *period, const trade::FinancialMetrics &f) {
        char line[160];
        std::snprintf(line, sizeof line, "%-9s %-13s %10.4f  %10.4f  %10.4f  %10.4f\n", name.c_str(), period, f.tr, f.sr,
                      f.md, f.hr);
        os << line;
    };
    for (const auto &r : out.runs) {
        row(r.currency, "in-sample", r.in_sample.metrics);
        row(r.currency, "out-of-sample", r.out_of_sample.metrics);
    }
    if (out.runs.size() > 1) {
        row("mean", "in-sample", mean_in);
        row("mean", "out-of-sample", mean_out);
    }
    out.report = os.str();
    return out;
}

} // namespace mgtn::cli
