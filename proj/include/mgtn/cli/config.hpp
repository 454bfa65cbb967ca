#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgtn/nn/layers.hpp"
#include "mgtn/nn/model.hpp"
#include "mgtn/trade/dqn.hpp"

namespace mgtn::cli {

using nlohmann::json;

namespace detail {

/// Records the source line of every value in well-formed JSON text, keyed
/// by dotted path ("layers.1.units"); the root is "".
class LineScanner {
public:
    explicit LineScanner(const std::string &text) : s_(text) {}

    std::map<std::string, std::size_t> run() {
        value("");
        return lines_;
    }

private:
    void ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            if (s_[i_] == '\n') ++line_;
            ++i_;
        }
    }

    std::string string() {
        std::string out;
        ++i_; // opening quote
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
            out += s_[i_++];
        }
        ++i_;
        return out;
    }

    static std::string join(const std::string &base, const std::string &key) {
        return base.empty() ? key : base + "." + key;
    }

    void value(const std::string &path) {
        ws();
        if (i_ >= s_.size()) return;
        lines_[path] = line_;
        const char c = s_[i_];
        if (c == '{') {
            ++i_;
            for (ws(); i_ < s_.size() && s_[i_] != '}'; ws()) {
                if (s_[i_] == ',') {
                    ++i_;
                    continue;
                }
                const std::string key = string();
                ws();
                ++i_; // ':'
                value(join(path, key));
            }
            ++i_;
        } else if (c == '[') {
            ++i_;
            std::size_t k = 0;
            for (ws(); i_ < s_.size() && s_[i_] != ']'; ws()) {
                if (s_[i_] == ',') {
                    ++i_;
                    continue;
                }
                value(join(path, std::to_string(k++)));
            }
            ++i_;
        } else if (c == '"') {
            string();
        } else {
            while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
                   !std::isspace(static_cast<unsigned char>(s_[i_])))
                ++i_;
        }
    }

    const std::string &s_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::map<std::string, std::size_t> lines_;
};

inline std::vector<std::string> split_path(const std::string &path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
    return parts;
}

} // namespace detail

/// A parsed config tree that remembers where each value came from.
struct ConfigDocument {
    json root = json::object();
    std::string origin = "<config>";
    std::map<std::string, std::size_t> lines;
    /// Paths set from the command line, with the assignment text.
    std::map<std::string, std::string> overrides;

    /// "file:line" of a value (or of its closest located parent).
    std::string where(const std::string &path) const {
        for (std::string p = path;; p = p.substr(0, p.rfind('.'))) {
            if (auto o = overrides.find(p); o != overrides.end()) return "override '" + o->second + "'";
            if (auto l = lines.find(p); l != lines.end()) return origin + ":" + std::to_string(l->second);
            if (p.find('.') == std::string::npos) break;
        }
        if (auto l = lines.find(""); l != lines.end()) return origin + ":" + std::to_string(l->second);
        return origin;
    }

    [[noreturn]] void fail(const std::string &path, const std::string &message) const {
        throw ConfigError(where(path) + ": " + (path.empty() ? "" : "'" + path + "' ") + message);
    }
};

inline ConfigDocument parse_config(const std::string &text, const std::string &origin = "<config>") {
    ConfigDocument d;
    d.origin = origin;
    try {
        d.root = json::parse(text);
    } catch (const json::parse_error &e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i) line += text[i] == '\n';
        throw ConfigError(origin + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
    if (!d.root.is_object()) throw ConfigError(origin + ":1: config must be a JSON object");
    d.lines = detail::LineScanner(text).run();
    return d;
}

inline ConfigDocument load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

/// Applies "a.b.c=value"; the value is read as JSON when it parses,
/// otherwise as a plain string. Numeric path parts index arrays.
inline void apply_override(ConfigDocument &d, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' must have the form key.path=value");
    const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json *node = &d.root;
    const auto parts = detail::split_path(path);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const std::string &p = parts[k];
        const bool last = k + 1 == parts.size();
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(p);
            } catch (const std::exception &) {
                throw ConfigError("override '" + assignment + "': '" + p + "' is not an array index");
            }
            if (idx >= node->size())
                throw ConfigError("override '" + assignment + "': index " + p + " is out of range");
            node = &(*node)[idx];
        } else {
            if (!node->is_object() && !node->is_null())
                throw ConfigError("override '" + assignment + "': cannot descend into a scalar");
            node = &(*node)[p];
        }
        if (last) *node = value;
    }
    d.overrides[path] = assignment;
}

/// Typed, position-aware view of one object in a config document.
class Section {
public:
    Section(const ConfigDocument &doc, const json &node, std::string path)
        : doc_(doc), node_(node), path_(std::move(path)) {
        if (!node_.is_object()) doc_.fail(path_, "must be an object");
    }

    /// Rejects keys outside `keys`, catching misspellings.
    void allow(std::initializer_list<const char *> keys) const {
        for (const auto &[k, v] : node_.items()) {
            bool ok = false;
            for (const char *a : keys) ok = ok || k == a;
            if (!ok) {
                std::string list;
                for (const char *a : keys) list += std::string(list.empty() ? "" : ", ") + a;
                doc_.fail(key_path(k), "is not a known key (expected one of: " + list + ")");
            }
        }
    }

    bool has(const std::string &key) const { return node_.contains(key) && !node_.at(key).is_null(); }

    template <class T> T get(const std::string &key, const T &fallback) const {
        return has(key) ? require<T>(key) : fallback;
    }

    template <class T> T require(const std::string &key) const {
        if (!has(key)) doc_.fail(key_path(key), "is required");
        const json &v = node_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) doc_.fail(key_path(key), "must be true or false");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned()))
                doc_.fail(key_path(key), "must be a non-negative integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) doc_.fail(key_path(key), "must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) doc_.fail(key_path(key), "must be a string");
        }
        try {
            return v.get<T>();
        } catch (const json::exception &) {
            doc_.fail(key_path(key), "has the wrong type");
        }
    }

    /// A string or a list of strings.
    std::vector<std::string> strings(const std::string &key) const {
        if (!has(key)) return {};
        const json &v = node_.at(key);
        if (v.is_string()) return {v.get<std::string>()};
        if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json &e) { return e.is_string(); }))
            return v.get<std::vector<std::string>>();
        doc_.fail(key_path(key), "must be a string or a list of strings");
    }

    Section child(const std::string &key) const {
        static const json empty = json::object();
        return has(key) ? Section(doc_, node_.at(key), key_path(key)) : Section(doc_, empty, key_path(key));
    }

    const json &node() const { return node_; }
    const std::string &path() const { return path_; }
    std::string key_path(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }
    [[noreturn]] void fail(const std::string &key, const std::string &message) const {
        doc_.fail(key.empty() ? path_ : key_path(key), message);
    }
    const ConfigDocument &document() const { return doc_; }

private:
    const ConfigDocument &doc_;
    const json &node_;
    std::string path_;
};

// ---------------------------------------------------------------------------

struct GraphConfig {
    /// time | kernel | correlation | carry | file
    std::string builder = "time";
    bool bidirectional = false;
    double decay = 1.0;
    std::size_t hops = 1;
    std::optional<double> sigma;
    std::string carry_mode = "relu";
    std::string path;
    bool directed = false;
    /// Symmetric degree normalisation D^{-1/2} A D^{-1/2}.
    bool normalize = true;
};

struct DataConfig {
    /// "files" or "synthetic"
    std::string source = "files";
    std::map<std::string, std::vector<std::string>> paths;
    json synthetic = json::object();
    /// Entity selection and order (currencies, subjects, stations); empty = all.
    std::vector<std::string> entities;
    std::size_t max_steps = 0;
    std::string country = "United States";
    std::size_t cities = 92;
};

struct LayoutConfig {
    std::size_t window = 0;
    std::size_t horizon = 1;
    /// Expected sample layout (J0, I1..IM); checked against the data when set.
    std::optional<std::size_t> features;
    Shape modes;
};

struct OptimizerConfig {
    std::string kind = "adam";
    double learning_rate = 1e-3;
};

struct TrainingConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    bool shuffle = true;
    double train_fraction = 0.7;
    double val_fraction = 0.2;
};

struct TradeConfig {
    std::vector<std::string> currencies;
    /// Day-based split; a chronological fraction split when unset.
    std::optional<std::size_t> train_days;
    double cost = 0.0;
    double equity_start = 1000.0;
    trade::DqnConfig dqn;
};

struct ExperimentConfig {
    /// trade | eeg | temperature | airquality
    std::string kind;
    std::uint64_t seed = 0;
    DataConfig data;
    LayoutConfig layout;
    std::vector<GraphConfig> graphs;
    std::vector<nn::LayerSpec> layers;
    OptimizerConfig optimizer;
    TrainingConfig training;
    TradeConfig trade;
    std::string out;
    /// Resolved tree (file + overrides + flags) for the config echo.
    json resolved;
};

inline const std::vector<std::string> &experiment_kinds() {
    static const std::vector<std::string> k{"trade", "eeg", "temperature", "airquality"};
    return k;
}

namespace detail {

inline GraphConfig parse_graph(const Section &s) {
    s.allow({"builder", "bidirectional", "decay", "hops", "sigma", "mode", "path", "directed", "normalize"});
    GraphConfig g;
    g.builder = s.require<std::string>("builder");
    if (g.builder != "time" && g.builder != "kernel" && g.builder != "correlation" && g.builder != "carry" &&
        g.builder != "file")
        s.fail("builder", "must be one of time, kernel, correlation, carry, file");
    g.bidirectional = s.get("bidirectional", false);
    g.decay = s.get("decay", 1.0);
    if (!(g.decay > 0.0 && g.decay <= 1.0)) s.fail("decay", "must lie in (0, 1]");
    g.hops = s.get<std::size_t>("hops", 1);
    if (g.hops == 0) s.fail("hops", "must be at least 1");
    if (s.has("sigma")) {
        g.sigma = s.require<double>("sigma");
        if (!(*g.sigma > 0.0)) s.fail("sigma", "must be positive");
    }
    g.carry_mode = s.get<std::string>("mode", "relu");
    if (g.carry_mode != "relu" && g.carry_mode != "abs") s.fail("mode", "must be relu or abs");
    g.path = s.get<std::string>("path", "");
    if (g.builder == "file" && g.path.empty()) s.fail("path", "is required for a file graph");
    g.directed = s.get("directed", false);
    g.normalize = s.get("normalize", true);
    return g;
}

inline nn::LayerSpec parse_layer(const Section &s) {
    s.allow({"type", "units", "feature_dims", "activation", "ranks", "input_modes", "output_modes", "graph_mode", "bias",
             "train_beta", "beta_init"});
    try {
        nn::LayerSpec l = nn::layer_spec_from_json(s.node());
        if (!s.has("units") && l.feature_dims.empty()) s.fail("units", "is required");
        return l;
    } catch (const Error &e) {
        s.fail("", e.what());
    } catch (const json::exception &) {
        s.fail("", "has a field of the wrong type");
    }
}

} // namespace detail

/// Validates a config document into an experiment description.
/// Precedence: built-in defaults < file < --override (in order) < --seed/--out.
/// `check_files` = false skips the data-path checks (static inspection).
inline ExperimentConfig parse_experiment_config(ConfigDocument doc, std::optional<std::uint64_t> seed_flag = {},
                                                std::optional<std::string> out_flag = {}, bool check_files = true) {
    if (seed_flag) {
        doc.root["seed"] = *seed_flag;
        doc.overrides["seed"] = "--seed " + std::to_string(*seed_flag);
    }
    if (out_flag) {
        doc.root["out"] = *out_flag;
        doc.overrides["out"] = "--out " + *out_flag;
    }
    const Section root(doc, doc.root, "");
    root.allow({"experiment", "seed", "description", "data", "layout", "graphs", "layers", "optimizer", "training",
                "trade", "out"});
    ExperimentConfig c;
    c.kind = root.require<std::string>("experiment");
    if (std::find(experiment_kinds().begin(), experiment_kinds().end(), c.kind) == experiment_kinds().end())
        root.fail("experiment", "must be one of trade, eeg, temperature, airquality");
    if (!root.has("seed")) root.fail("seed", "is required (set it in the config or pass --seed)");
    c.seed = root.require<std::uint64_t>("seed");
    c.out = root.get<std::string>("out", "");

    const Section data = root.child("data");
    data.allow({"source", "paths", "synthetic", "entities", "max_steps", "country", "cities"});
    c.data.source = data.get<std::string>("source", "files");
    if (c.data.source != "files" && c.data.source != "synthetic") data.fail("source", "must be files or synthetic");
    const Section paths = data.child("paths");
    for (const auto &[k, v] : paths.node().items()) c.data.paths[k] = paths.strings(k);
    if (data.has("synthetic")) c.data.synthetic = data.child("synthetic").node();
    c.data.entities = data.strings("entities");
    c.data.max_steps = data.get<std::size_t>("max_steps", 0);
    c.data.country = data.get<std::string>("country", c.data.country);
    c.data.cities = data.get<std::size_t>("cities", c.data.cities);
    if (c.data.source == "files" && check_files) {
        std::vector<std::string> needed;
        if (c.kind == "trade") needed = {"fx", "carry"};
        if (c.kind == "eeg") needed = {"eeg", "demographics"};
        if (c.kind == "temperature") needed = {"temperature"};
        if (c.kind == "airquality") needed = {"airquality"};
        for (const auto &k : needed) {
            if (!c.data.paths.count(k) || c.data.paths[k].empty())
                paths.fail(k, "is required for " + c.kind + " data files");
        }
        for (const auto &[k, list] : c.data.paths)
            for (std::size_t i = 0; i < list.size(); ++i)
                if (!std::filesystem::exists(list[i])) paths.fail(k, "refers to a missing file: " + list[i]);
    }

    const Section layout = root.child("layout");
    layout.allow({"window", "horizon", "features", "modes"});
    c.layout.window = layout.require<std::size_t>("window");
    if (c.layout.window < 2) layout.fail("window", "must be at least 2");
    c.layout.horizon = layout.get<std::size_t>("horizon", c.kind == "eeg" ? 0 : 1);
    if (layout.has("features")) c.layout.features = layout.require<std::size_t>("features");
    c.layout.modes = layout.get<Shape>("modes", {});
    if (!c.layout.modes.empty() && c.layout.modes.front() != c.layout.window)
        layout.fail("modes", "must start with the window length " + std::to_string(c.layout.window));

    if (!root.has("graphs") || !doc.root["graphs"].is_array() || doc.root["graphs"].empty())
        root.fail("graphs", "must be a non-empty list");
    for (std::size_t i = 0; i < doc.root["graphs"].size(); ++i)
        c.graphs.push_back(detail::parse_graph(Section(doc, doc.root["graphs"][i], "graphs." + std::to_string(i))));
    if (c.graphs.front().builder != "time" && c.graphs.front().builder != "file")
        root.fail("graphs.0", "must describe the time mode (builder time or file)");

    if (!root.has("layers") || !doc.root["layers"].is_array() || doc.root["layers"].empty())
        root.fail("layers", "must be a non-empty list");
    for (std::size_t i = 0; i < doc.root["layers"].size(); ++i)
        c.layers.push_back(detail::parse_layer(Section(doc, doc.root["layers"][i], "layers." + std::to_string(i))));

    const Section opt = root.child("optimizer");
    opt.allow({"kind", "lr"});
    c.optimizer.kind = opt.get<std::string>("kind", c.kind == "trade" ? "adam" : "rmsprop");
    if (c.optimizer.kind != "adam" && c.optimizer.kind != "rmsprop" && c.optimizer.kind != "sgd")
        opt.fail("kind", "must be adam, rmsprop or sgd");
    c.optimizer.learning_rate = opt.require<double>("lr");
    if (!(c.optimizer.learning_rate > 0.0)) opt.fail("lr", "must be positive");

    const Section tr = root.child("training");
    tr.allow({"epochs", "batch_size", "shuffle", "train_fraction", "val_fraction"});
    c.training.epochs = tr.get<std::size_t>("epochs", c.training.epochs);
    c.training.batch_size = tr.get<std::size_t>("batch_size", c.training.batch_size);
    if (c.training.batch_size == 0) tr.fail("batch_size", "must be positive");
    c.training.shuffle = tr.get("shuffle", true);
    c.training.train_fraction = tr.get("train_fraction", c.training.train_fraction);
    c.training.val_fraction = tr.get("val_fraction", c.training.val_fraction);
    if (!(c.training.train_fraction > 0.0 && c.training.train_fraction < 1.0))
        tr.fail("train_fraction", "must lie in (0, 1)");
    if (!(c.training.val_fraction >= 0.0 && c.training.val_fraction < 1.0)) tr.fail("val_fraction", "must lie in [0, 1)");

    const Section td = root.child("trade");
    td.allow({"currencies", "train_days", "cost", "equity_start", "episodes", "gamma", "buffer", "target_sync",
              "epsilon_start", "epsilon_end", "epsilon_decay_fraction", "train_every", "reward_scale"});
    c.trade.currencies = td.strings("currencies");
    if (td.has("train_days")) c.trade.train_days = td.require<std::size_t>("train_days");
    c.trade.cost = td.get("cost", 0.0);
    c.trade.equity_start = td.get("equity_start", 1000.0);
    auto &q = c.trade.dqn;
    q.learning_rate = c.optimizer.learning_rate;
    q.batch_size = c.training.batch_size;
    q.episodes = td.get<std::size_t>("episodes", q.episodes);
    q.gamma = td.get("gamma", q.gamma);
    if (!(q.gamma >= 0.0 && q.gamma <= 1.0)) td.fail("gamma", "must lie in [0, 1]");
    q.buffer_capacity = td.get<std::size_t>("buffer", q.buffer_capacity);
    if (q.buffer_capacity < q.batch_size) td.fail("buffer", "must hold at least one batch");
    q.target_sync = td.get<std::size_t>("target_sync", q.target_sync);
    q.epsilon_start = td.get("epsilon_start", q.epsilon_start);
    q.epsilon_end = td.get("epsilon_end", q.epsilon_end);
    q.epsilon_decay_fraction = td.get("epsilon_decay_fraction", q.epsilon_decay_fraction);
    q.train_every = td.get<std::size_t>("train_every", q.train_every);
    if (q.train_every == 0) td.fail("train_every", "must be at least 1");
    q.reward_scale = td.get("reward_scale", q.reward_scale);
    if (c.kind == "trade") {
        if (c.layers.back().units != 2) root.fail("layers", "the last trading layer must have 2 units (buy, sell)");
        if (c.optimizer.kind != "adam") opt.fail("kind", "trading agents use adam");
    }
    c.resolved = doc.root;
    return c;
}

} // namespace mgtn::cli
