#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "mgtn/cli/config.hpp"
#include "mgtn/cli/experiments.hpp"
#include "mgtn/tensor_io.hpp"
#include "mgtn/tt.hpp"

namespace mgtn::cli {

inline constexpr const char *kVersion = "1.0.0";

enum ExitCode : int { Ok = 0, Failure = 1, BadConfig = 2, BadData = 3, NumericFailure = 4 };

namespace detail {

inline void write_text(const std::filesystem::path &p, const std::string &text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw DataError("cannot write " + p.string());
    os << text;
}

inline void write_json(const std::filesystem::path &p, const json &j) { write_text(p, j.dump(2) + "\n"); }

/// Environment and seed record written next to every run's results.
inline json manifest(const std::string &command, const std::vector<std::string> &argv, std::uint64_t seed,
                     const std::vector<std::string> &streams, const std::vector<std::string> &files, double seconds) {
    const SeedSequence seq(seed);
    json s = json::object();
    for (const auto &n : streams) s[n] = seq.stream_seed(n);
    return {{"tool", "mgtn"},
            {"version", kVersion},
            {"command", command},
            {"argv", argv},
            {"seed", seed},
            {"streams", s},
            {"compiler", __VERSION__},
            {"cplusplus", __cplusplus},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"files", files},
            {"elapsed_seconds", seconds}};
}

inline std::string csv_number(double v) { return format_number(v); }

inline std::vector<std::size_t> parse_size_list(const std::string &text, const char *what) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
            out.push_back(v);
        } catch (const std::exception &) {
            throw ConfigError(std::string(what) + ": '" + part + "' is not a non-negative integer");
        }
    }
    return out;
}

struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> overrides;
    bool quiet = false;
};

inline ConfigDocument read_document(const RunFlags &f) {
    ConfigDocument doc = load_config(f.config);
    for (const auto &o : f.overrides) apply_override(doc, o);
    return doc;
}

inline std::string output_dir(const ExperimentConfig &c) {
    if (!c.out.empty()) return c.out;
    return "runs/" + c.kind + "-" + std::to_string(c.seed);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline int cmd_train(const detail::RunFlags &f, const std::vector<std::string> &argv, std::ostream &out,
                     std::ostream &log) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = parse_experiment_config(detail::read_document(f), f.seed,
                                                 f.out.empty() ? std::nullopt : std::optional(f.out));
    const std::filesystem::path dir = detail::output_dir(c);
    std::filesystem::create_directories(dir);
    const PreparedData d = prepare_data(c, resolve_data_paths(c, (dir / "data").string()));
    const TrainOutcome r = run_train(c, d, [&](const nn::EpochRecord &e) {
        if (f.quiet) return;
        log << "epoch " << e.epoch << "  train " << format_number(e.train_loss);
        if (e.val_loss) log << "  val " << format_number(*e.val_loss);
        log << "\n";
    });
    std::ostringstream curves;
    curves << "epoch,train_loss,val_loss\n";
    for (const auto &e : r.curves)
        curves << e.epoch << "," << detail::csv_number(e.train_loss) << ","
               << (e.val_loss ? detail::csv_number(*e.val_loss) : "") << "\n";
    detail::write_json(dir / "config.json", c.resolved);
    detail::write_json(dir / "metrics.json", r.metrics);
    detail::write_text(dir / "curves.csv", curves.str());
    detail::write_text(dir / "report.txt", r.report);
    nn::save_checkpoint((dir / "model.json").string(), r.model);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail::write_json(dir / "manifest.json",
                       detail::manifest("train", argv, c.seed, {"init", "shuffle", "synth"},
                                        {"config.json", "metrics.json", "curves.csv", "report.txt", "model.json"}, secs));
    out << r.report << "results in " << dir.string() << "\n";
    return Ok;
}

inline int cmd_trade(const detail::RunFlags &f, const std::vector<std::string> &argv, std::ostream &out,
                     std::ostream &log) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = parse_experiment_config(detail::read_document(f), f.seed,
                                                 f.out.empty() ? std::nullopt : std::optional(f.out));
    if (c.kind != "trade") throw ConfigError(f.config + ": the trade command needs \"experiment\": \"trade\"");
    const std::filesystem::path dir = detail::output_dir(c);
    std::filesystem::create_directories(dir);
    const PreparedData d = prepare_data(c, resolve_data_paths(c, (dir / "data").string()));
    const TradeOutcome r = run_trade(c, d, [&](const std::string &cur, const trade::EpisodeLog &l) {
        if (f.quiet) return;
        log << cur << " episode " << l.episode << "  eps " << format_number(l.epsilon) << "  loss "
            << format_number(l.loss) << "  TR " << format_number(l.metrics.tr) << "%\n";
    });
    std::ostringstream curves, equity;
    curves << "currency,episode,steps,epsilon,loss,tr_pct,sr,md_pct,hr_pct\n";
    equity << "currency,period,step,equity\n";
    std::vector<std::string> streams{"synth"};
    for (const auto &run : r.runs) {
        for (const auto &l : run.episodes)
            curves << run.currency << "," << l.episode << "," << l.steps << "," << detail::csv_number(l.epsilon) << ","
                   << detail::csv_number(l.loss) << "," << detail::csv_number(l.metrics.tr) << ","
                   << detail::csv_number(l.metrics.sr) << "," << detail::csv_number(l.metrics.md) << ","
                   << detail::csv_number(l.metrics.hr) << "\n";
        for (auto [period, ev] : {std::pair{"in_sample", &run.in_sample}, std::pair{"out_of_sample", &run.out_of_sample}}) {
            const auto e = trade::equity_curve(ev->rewards, c.trade.equity_start);
            for (std::size_t t = 0; t < e.size(); ++t)
                equity << run.currency << "," << period << "," << t << "," << detail::csv_number(e[t]) << "\n";
        }
        for (const char *s : {"init.", "explore.", "replay."}) streams.push_back(s + run.currency);
    }
    detail::write_json(dir / "config.json", c.resolved);
    detail::write_json(dir / "metrics.json", r.metrics);
    detail::write_text(dir / "curves.csv", curves.str());
    detail::write_text(dir / "equity.csv", equity.str());
    detail::write_text(dir / "report.txt", r.report);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail::write_json(dir / "manifest.json",
                       detail::manifest("trade", argv, c.seed, streams,
                                        {"config.json", "metrics.json", "curves.csv", "equity.csv", "report.txt"}, secs));
    out << r.report << "results in " << dir.string() << "\n";
    return Ok;
}

/// NP table from the configured layout; no data is read.
inline int cmd_paramcount(const detail::RunFlags &f, const std::vector<std::string> &argv, std::ostream &out) {
    ConfigDocument doc = detail::read_document(f);
    const auto seed = f.seed ? f.seed : (doc.root.contains("seed") ? std::nullopt : std::optional<std::uint64_t>(0));
    ExperimentConfig c =
        parse_experiment_config(doc, seed, f.out.empty() ? std::nullopt : std::optional(f.out), false);
    if (!c.layout.features || c.layout.modes.empty())
        doc.fail("layout", "needs 'features' and 'modes' for a parameter count");
    Shape shape{*c.layout.features};
    shape.insert(shape.end(), c.layout.modes.begin(), c.layout.modes.end());
    if (c.graphs.size() != c.layout.modes.size())
        doc.fail("graphs", "must list one graph per entry of layout.modes");
    std::vector<AdjacencyMatrix> graphs;
    for (std::size_t m : c.layout.modes) graphs.emplace_back(Tensor({m, m}), false);
    Rng rng = SeedSequence(c.seed).stream("init");
    const nn::Model model = build_model(c, shape, graphs, rng);
    const std::string report = "input " + to_string(shape) + "\n" + param_report(model);
    out << report;
    if (!f.out.empty()) {
        const std::filesystem::path dir = f.out;
        std::filesystem::create_directories(dir);
        json m = param_json(model);
        m["input"] = shape;
        detail::write_json(dir / "config.json", c.resolved);
        detail::write_json(dir / "metrics.json", m);
        detail::write_text(dir / "report.txt", report);
        detail::write_json(dir / "manifest.json", detail::manifest("paramcount", argv, c.seed, {"init"},
                                                                   {"config.json", "metrics.json", "report.txt"}, 0.0));
    }
    return Ok;
}

/// Default truncation of decompose: drops singular values at round-off level.
inline constexpr double kNumericalRankTolerance = 1e-14;

struct DecomposeFlags {
    std::string input;
    std::string ranks;
    std::optional<double> tolerance;
    std::string out;
    bool binary = false;
};

/// TT-SVD of a stored tensor: cores, achieved ranks and reconstruction error.
inline int cmd_decompose(const DecomposeFlags &f, const std::vector<std::string> &argv, std::ostream &out) {
    const Tensor x = load_tensor(f.input);
    TTSvdOptions o;
    if (!f.ranks.empty()) o.max_ranks = detail::parse_size_list(f.ranks, "--ranks");
    if (f.tolerance) {
        if (!(*f.tolerance > 0.0 && *f.tolerance < 1.0)) throw ConfigError("--tol must lie in (0, 1)");
        o.tolerance = f.tolerance;
    } else if (f.ranks.empty()) {
        o.tolerance = kNumericalRankTolerance;
    }
    TTSvdResult r;
    try {
        r = tt_svd_detailed(x, o);
    } catch (const ShapeError &e) {
        throw ConfigError(std::string("decompose: ") + e.what());
    }
    const Tensor back = tt_reconstruct(r.tt);
    double diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) diff += (x[i] - back[i]) * (x[i] - back[i]);
    const double norm = x.frobenius_norm();
    const double abs_err = std::sqrt(diff), rel_err = norm > 0.0 ? abs_err / norm : abs_err;
    std::ostringstream os;
    os << "input      " << f.input << " " << to_string(x.shape()) << "\n";
    os << "ranks      " << to_string_ranks(r.tt.ranks()) << "\n";
    os << "params     " << tt_param_count(r.tt) << " (dense " << x.size() << ")\n";
    os << "abs error  " << format_number(abs_err) << "\n";
    os << "rel error  " << format_number(rel_err) << "\n";
    out << os.str();
    if (!f.out.empty()) {
        const std::filesystem::path dir = f.out;
        std::filesystem::create_directories(dir);
        std::vector<std::string> files{"metrics.json", "report.txt"};
        for (std::size_t n = 0; n < r.tt.order(); ++n) {
            const std::string name = "core" + std::to_string(n + 1) + (f.binary ? ".bin" : ".txt");
            save_tensor((dir / name).string(), r.tt.cores[n], f.binary);
            files.push_back(name);
        }
        json m{{"shape", x.shape()},       {"ranks", r.tt.ranks()},   {"params", tt_param_count(r.tt)},
               {"abs_error", abs_err},     {"rel_error", rel_err},    {"step_errors", r.step_errors}};
        detail::write_json(dir / "metrics.json", m);
        detail::write_text(dir / "report.txt", os.str());
        detail::write_json(dir / "manifest.json", detail::manifest("decompose", argv, 0, {}, files, 0.0));
    }
    return Ok;
}

inline int cmd_synth(const std::string &kind, std::uint64_t seed, const std::string &dir, std::ostream &out) {
    for (const auto &p : data::write_synth(data::synth_generate(kind, seed), dir)) out << p << "\n";
    return Ok;
}

// ---------------------------------------------------------------------------

/// Parses arguments and runs one command; returns the process exit code.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Multi-graph tensor networks: training, trading and tensor utilities", "mgtn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    detail::RunFlags run;
    std::string seed_text;
    auto add_run_flags = [&](CLI::App *sub) {
        sub->add_option("--config", run.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed_text, "seed (overrides the config)");
        sub->add_option("--out", run.out, "output directory (overrides the config)");
        sub->add_option("--override", run.overrides, "set a config value, key.path=value (repeatable)");
        sub->add_flag("--quiet", run.quiet, "no per-epoch progress");
    };
    CLI::App *train = app.add_subcommand("train", "train and evaluate a model on eeg, temperature or airquality data");
    add_run_flags(train);
    CLI::App *trd = app.add_subcommand("trade", "train DQN trading agents and backtest them");
    add_run_flags(trd);
    CLI::App *pc = app.add_subcommand("paramcount", "parameter counts of a configured model");
    add_run_flags(pc);

    DecomposeFlags dec;
    CLI::App *dc = app.add_subcommand("decompose", "TT-SVD of a stored tensor");
    dc->add_option("tensor", dec.input, "tensor file (text or binary)")->required()->check(CLI::ExistingFile);
    auto *ranks = dc->add_option("--ranks", dec.ranks, "rank caps R0,...,RN (boundaries 1)");
    dc->add_option("--tol", dec.tolerance, "relative accuracy in (0, 1); default 1e-14 without --ranks")->excludes(ranks);
    dc->add_option("--out", dec.out, "directory for cores and report");
    dc->add_flag("--binary", dec.binary, "write cores in binary format");
    dc->add_option("--seed", seed_text, "ignored; accepted for uniformity");

    std::string synth_kind, synth_out;
    CLI::App *sy = app.add_subcommand("synth", "write a seeded synthetic dataset");
    sy->add_option("kind", synth_kind, "fx, eeg, temperature or airquality")
        ->required()
        ->check(CLI::IsMember({"fx", "eeg", "temperature", "airquality"}));
    sy->add_option("--seed", seed_text, "generator seed")->required();
    sy->add_option("--out", synth_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForVersion &) {
        out << kVersion << "\n";
        return Ok;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return BadConfig;
    }
    try {
        if (!seed_text.empty()) run.seed = detail::parse_size_list(seed_text, "--seed").at(0);
        if (train->parsed()) return cmd_train(run, args, out, err);
        if (trd->parsed()) return cmd_trade(run, args, out, err);
        if (pc->parsed()) return cmd_paramcount(run, args, out);
        if (dc->parsed()) return cmd_decompose(dec, args, out);
        if (sy->parsed()) return cmd_synth(synth_kind, *run.seed, synth_out, out);
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return BadConfig;
    } catch (const ShapeError &e) {
        err << "config error: " << e.what() << "\n";
        return BadConfig;
    } catch (const DataError &e) {
        err << "data error: " << e.what() << "\n";
        return BadData;
    } catch (const NumericError &e) {
        err << "numeric error: " << e.what() << "\n";
        return NumericFailure;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return Failure;
    }
    return Failure;
}

} // namespace mgtn::cli
