#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "mgtn/csv.hpp"
#include "mgtn/data/encode.hpp"
#include "mgtn/data/loaders.hpp"
#include "mgtn/random.hpp"

namespace mgtn::data {

/// Seeded generators that write the same schemas the loaders read.
/// Output tables are keyed by file name.
using SynthTables = std::map<std::string, CsvTable>;

namespace detail {

inline std::string num(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// "YYYY-MM-DD" for a day offset from a civil date.
inline std::string civil_date(int y, unsigned m, unsigned d, long offset_days) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{year{y} / month{m} / day{d}} + days{offset_days}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

inline std::string pad_name(const char *prefix, std::size_t i, std::size_t width = 3) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, static_cast<int>(width), i);
    return buf;
}

} // namespace detail

// ---------------------------------------------------------------------------

struct FxSynthOptions {
    std::size_t currencies = 9;
    /// One-minute steps (prices have steps + 1 rows per currency).
    std::size_t steps = 4000;
    /// Per-step log-price noise.
    double noise = 5e-4;
    /// Drift per step is drift_scale * carry_i.
    double drift_scale = 1e-4;
    /// Relative spread of high/low around open/close.
    double jitter = 2e-4;
    /// Planted carry per currency; drawn uniform in [-1, 1] when empty.
    std::vector<double> carry;
    /// Forward discount per unit carry difference in the carry quotes.
    double carry_quote_scale = 0.01;
};

inline std::vector<std::string> fx_currency_names(std::size_t n) {
    const std::vector<std::string> iso{"EUR", "GBP", "JPY", "CHF", "AUD", "CAD", "NZD", "SEK", "NOK"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(i < iso.size() ? iso[i] : detail::pad_name("C", i, 2));
    return out;
}

/// Geometric random walks with carry-proportional drift; "fx.csv" (long
/// OHLC table, minute stamps from 2019-10-01) and "carry.csv".
inline SynthTables synth_fx(std::uint64_t seed, const FxSynthOptions &o = {}) {
    Rng rng = SeedSequence(seed).stream("synth.fx");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto names = fx_currency_names(o.currencies);
    std::vector<double> carry = o.carry;
    if (carry.empty())
        for (std::size_t i = 0; i < o.currencies; ++i) carry.push_back(unit(rng));
    if (carry.size() != o.currencies) throw ConfigError("planted carry vector length differs from the currency count");

    CsvTable fx{{"timestamp", "currency", "open", "high", "low", "close"}, {}};
    std::vector<double> logp(o.currencies);
    for (std::size_t c = 0; c < o.currencies; ++c) logp[c] = std::log(0.5 + 0.1 * static_cast<double>(c + 1));
    const std::vector<double> initial = logp;
    for (std::size_t t = 0; t <= o.steps; ++t) {
        const long minute = static_cast<long>(t);
        char hhmm[8];
        std::snprintf(hhmm, sizeof hhmm, "%02ld:%02ld", (minute / 60) % 24, minute % 60);
        const std::string stamp = detail::civil_date(2019, 10, 1, minute / 1440) + " " + hhmm;
        for (std::size_t c = 0; c < o.currencies; ++c) {
            const double open = std::exp(logp[c]);
            if (t > 0) logp[c] += o.drift_scale * carry[c] + o.noise * gauss(rng);
            const double close = std::exp(logp[c]);
            const double hi = std::max(open, close) * std::exp(o.jitter * std::abs(gauss(rng)));
            const double lo = std::min(open, close) * std::exp(-o.jitter * std::abs(gauss(rng)));
            fx.rows.push_back({stamp, names[c], detail::num(open), detail::num(hi), detail::num(lo), detail::num(close)});
        }
    }
    CsvTable cq{{"base", "quote", "spot", "forward"}, {}};
    for (std::size_t i = 0; i < o.currencies; ++i)
        for (std::size_t j = 0; j < o.currencies; ++j) {
            if (i == j) continue;
            const double spot = std::exp(initial[i] - initial[j]);
            const double fwd = spot * (1.0 - o.carry_quote_scale * (carry[i] - carry[j]));
            cq.rows.push_back({names[i], names[j], detail::num(spot), detail::num(fwd)});
        }
    return {{"fx.csv", std::move(fx)}, {"carry.csv", std::move(cq)}};
}

// ---------------------------------------------------------------------------

struct EegSynthOptions {
    std::size_t subjects = 9;
    std::size_t videos = 10;
    std::size_t seconds = 60;
    /// Mean shift of every band power between the two classes, in noise
    /// standard deviations.
    double separation = 1.5;
};

/// Class-conditional band powers in the confused-student schema:
/// "EEG_data.csv" and "demographic_info.csv".
inline SynthTables synth_eeg(std::uint64_t seed, const EegSynthOptions &o = {}) {
    Rng rng = SeedSequence(seed).stream("synth.eeg");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const auto cols = eeg_feature_columns();
    // per-feature level, scale and class direction
    std::vector<double> level, scale, dir;
    for (std::size_t f = 0; f < cols.size(); ++f) {
        level.push_back(f < 2 ? 50.0 : (f == 2 ? 0.0 : 1e4 / static_cast<double>(f)));
        scale.push_back(f < 2 ? 10.0 : (f == 2 ? 50.0 : 2e3 / static_cast<double>(f)));
        dir.push_back(f % 2 == 0 ? 1.0 : -1.0);
    }
    CsvTable eeg;
    eeg.header = {"SubjectID", "VideoID"};
    for (const auto &c : cols) eeg.header.push_back(c);
    eeg.header.push_back("predefinedlabel");
    eeg.header.push_back("user-definedlabeln");
    for (std::size_t s = 0; s < o.subjects; ++s) {
        const double offset = 0.3 * gauss(rng);
        for (std::size_t v = 0; v < o.videos; ++v) {
            const bool label = coin(rng);
            for (std::size_t t = 0; t < o.seconds; ++t) {
                std::vector<std::string> row{detail::num(static_cast<double>(s)), detail::num(static_cast<double>(v))};
                for (std::size_t f = 0; f < cols.size(); ++f) {
                    const double z = offset + (label ? 0.5 : -0.5) * o.separation * dir[f] + gauss(rng);
                    row.push_back(detail::num(level[f] + scale[f] * z, 8));
                }
                row.push_back(v % 2 ? "1.0" : "0.0");
                row.push_back(label ? "1.0" : "0.0");
                eeg.rows.push_back(std::move(row));
            }
        }
    }
    CsvTable demo{{"subject ID", " age", " ethnicity", " gender"}, {}};
    const char *eth[] = {"Han Chinese", "English", "Bengali"};
    for (std::size_t s = 0; s < o.subjects; ++s)
        demo.rows.push_back({std::to_string(s), std::to_string(24 + (s * 7) % 8), eth[(s * 5) % 3], s % 3 ? "M" : "F"});
    return {{"EEG_data.csv", std::move(eeg)}, {"demographic_info.csv", std::move(demo)}};
}

// ---------------------------------------------------------------------------

struct TemperatureSynthOptions {
    std::size_t cities = 92;
    std::size_t months = 240;
    double noise = 0.8;
    /// Fraction of temperature cells left empty (forward-filled on load).
    double missing = 0.0;
};

/// Seasonal monthly temperatures with city offsets, Berkeley Earth schema:
/// "temperature.csv" starting 1990-01.
inline SynthTables synth_temperature(std::uint64_t seed, const TemperatureSynthOptions &o = {}) {
    Rng rng = SeedSequence(seed).stream("synth.temperature");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> lat_d(25.0, 48.0), lon_d(70.0, 124.0), u(0.0, 1.0);
    CsvTable t{{"dt", "AverageTemperature", "AverageTemperatureUncertainty", "City", "Country", "Latitude", "Longitude"},
               {}};
    for (std::size_t c = 0; c < o.cities; ++c) {
        const double lat = lat_d(rng), lon = lon_d(rng);
        const double base = 22.0 - 0.7 * (lat - 25.0) + gauss(rng);
        const double amp = 6.0 + 0.35 * (lat - 25.0);
        double ar = 0.0;
        const std::string name = detail::pad_name("City", c + 1);
        char la[16], lo[16];
        std::snprintf(la, sizeof la, "%.2fN", lat);
        std::snprintf(lo, sizeof lo, "%.2fW", lon);
        for (std::size_t m = 0; m < o.months; ++m) {
            ar = 0.5 * ar + o.noise * gauss(rng);
            const double month = static_cast<double>(m % 12 + 1);
            const double temp = base + amp * std::sin(2.0 * std::numbers::pi * (month - 4.0) / 12.0) + ar;
            const double unc = 0.2 + 0.1 * std::abs(gauss(rng));
            char dt[48];
            std::snprintf(dt, sizeof dt, "%04zu-%02zu-01", 1990 + m / 12, m % 12 + 1);
            const bool drop = m > 0 && u(rng) < o.missing;
            t.rows.push_back({dt, drop ? "" : detail::num(temp, 6), drop ? "" : detail::num(unc, 4), name,
                              "United States", la, lo});
        }
    }
    return {{"temperature.csv", std::move(t)}};
}

// ---------------------------------------------------------------------------

struct AirQualitySynthOptions {
    std::size_t stations = 12;
    std::size_t hours = 3000;
    /// Loading of every site on the shared pollution factor.
    double shared = 0.8;
    double persistence = 0.9;
};

inline std::vector<std::string> airquality_station_names(std::size_t n) {
    const std::vector<std::string> known{"Aotizhongxin", "Changping",    "Dingling", "Dongsi",  "Guanyuan", "Gucheng",
                                         "Huairou",      "Nongzhanguan", "Shunyi",   "Tiantan", "Wanliu",   "Wanshouxigong"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(i < known.size() ? known[i] : detail::pad_name("Site", i, 2));
    return out;
}

/// Correlated AR(1) PM2.5 series per site plus auxiliary columns, Beijing
/// multi-site schema in one "airquality.csv" starting 2013-03-01 00:00.
inline SynthTables synth_airquality(std::uint64_t seed, const AirQualitySynthOptions &o = {}) {
    Rng rng = SeedSequence(seed).stream("synth.airquality");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> wind(0, 15);
    const auto names = airquality_station_names(o.stations);
    const auto wd = compass_points();
    std::vector<double> shared(o.hours);
    double f = 0.0;
    for (auto &v : shared) v = f = o.persistence * f + gauss(rng);
    CsvTable t{{"No", "year", "month", "day", "hour", "PM2.5", "PM10", "SO2", "NO2", "CO", "O3", "TEMP", "PRES", "DEWP",
                "RAIN", "wd", "WSPM", "station"},
               {}};
    const double idio = std::sqrt(std::max(0.0, 1.0 - o.shared * o.shared));
    for (std::size_t s = 0; s < o.stations; ++s) {
        const double base = 60.0 + 10.0 * gauss(rng);
        double own = 0.0;
        for (std::size_t h = 0; h < o.hours; ++h) {
            own = o.persistence * own + gauss(rng);
            const double z = o.shared * shared[h] + idio * own;
            const double pm = std::max(3.0, base + 25.0 * z);
            const std::string date = detail::civil_date(2013, 3, 1, static_cast<long>(h / 24));
            const double hour = static_cast<double>(h % 24);
            const double temp = 12.0 + 6.0 * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0) + gauss(rng);
            t.rows.push_back({std::to_string(h + 1), date.substr(0, 4), std::to_string(std::stoi(date.substr(5, 2))),
                              std::to_string(std::stoi(date.substr(8, 2))), std::to_string(h % 24), detail::num(pm, 6),
                              detail::num(pm * 1.3 + 5.0 * std::abs(gauss(rng)), 6),
                              detail::num(8.0 + 2.0 * std::abs(gauss(rng)), 5), detail::num(40.0 + 0.3 * pm + gauss(rng), 5),
                              detail::num(900.0 + 8.0 * pm + 20.0 * gauss(rng), 6),
                              detail::num(std::max(1.0, 60.0 - 0.2 * pm + 5.0 * gauss(rng)), 5), detail::num(temp, 5),
                              detail::num(1012.0 + 3.0 * gauss(rng), 6), detail::num(temp - 8.0 + gauss(rng), 5),
                              h % 97 == 0 ? "0.4" : "0.0", wd[wind(rng)], detail::num(1.5 + std::abs(gauss(rng)), 4),
                              names[s]});
        }
    }
    return {{"airquality.csv", std::move(t)}};
}

// ---------------------------------------------------------------------------

/// Writes every table of a generator into `dir`; returns the file paths.
inline std::vector<std::string> write_synth(const SynthTables &tables, const std::string &dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto &[name, table] : tables) {
        const auto p = (std::filesystem::path(dir) / name).string();
        write_csv_file(p, table);
        paths.push_back(p);
    }
    return paths;
}

inline SynthTables synth_generate(const std::string &kind, std::uint64_t seed) {
    if (kind == "fx") return synth_fx(seed);
    if (kind == "eeg") return synth_eeg(seed);
    if (kind == "temperature") return synth_temperature(seed);
    if (kind == "airquality") return synth_airquality(seed);
    throw ConfigError("unknown synthetic data kind '" + kind + "' (fx, eeg, temperature, airquality)");
}

} // namespace mgtn::data
