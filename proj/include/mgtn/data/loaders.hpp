#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgtn/csv.hpp"
#include "mgtn/data/dataset.hpp"
#include "mgtn/data/encode.hpp"

namespace mgtn::data {

namespace detail {

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline void trim_table(CsvTable &t) {
    for (auto &h : t.header) h = trim(h);
    for (auto &r : t.rows)
        for (auto &c : r) c = trim(c);
}

inline std::string where(const std::string &source, std::size_t row) {
    return source + ":" + std::to_string(row + 2);
}

/// Index of each name in `order`, or first-appearance order when empty.
inline std::vector<std::string> resolve_order(const std::vector<std::string> &seen, const std::vector<std::string> &order,
                                              const char *what) {
    if (order.empty()) return seen;
    for (const auto &o : order)
        if (std::find(seen.begin(), seen.end(), o) == seen.end())
            throw DataError(std::string("no data for ") + what + " '" + o + "'");
    return order;
}

inline std::size_t position(const std::vector<std::string> &v, const std::string &x) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}

} // namespace detail

// ---------------------------------------------------------------------------
// FX: long OHLC table "timestamp,currency,open,high,low,close"

struct FxData {
    /// (4, T, C) OHLC log-returns; y holds the close log-returns (C, T).
    Panel panel;
    /// Close prices (C, T + 1); column t + 1 is the close after return t.
    Tensor close;
    std::vector<std::string> currencies;
};

inline FxData load_fx_table(const CsvTable &t, const std::vector<std::string> &currencies = {},
                            const std::string &source = "fx") {
    const std::size_t c_ts = t.column("timestamp"), c_cur = t.column("currency");
    const std::size_t c_px[4] = {t.column("open"), t.column("high"), t.column("low"), t.column("close")};
    std::map<std::string, std::size_t> time_index;
    std::vector<std::string> seen;
    for (const auto &r : t.rows) {
        time_index.emplace(r[c_ts], 0);
        if (std::find(seen.begin(), seen.end(), r[c_cur]) == seen.end()) seen.push_back(r[c_cur]);
    }
    const auto names = detail::resolve_order(seen, currencies, "currency");
    std::vector<std::string> times;
    for (auto &[k, v] : time_index) {
        v = times.size();
        times.push_back(k);
    }
    const std::size_t nc = names.size(), nt = times.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<std::vector<double>>> px(nc, std::vector<std::vector<double>>(4, std::vector<double>(nt, nan)));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto &r = t.rows[i];
        const std::size_t c = detail::position(names, r[c_cur]);
        if (c == nc) continue;
        for (int f = 0; f < 4; ++f) {
            const double v = parse_number(r[c_px[f]], detail::where(source, i));
            if (std::isfinite(v) && !(v > 0.0))
                throw DataError(detail::where(source, i) + ": non-positive price " + r[c_px[f]]);
            px[c][f][time_index[r[c_ts]]] = v;
        }
    }
    std::size_t start = 0;
    for (auto &cur : px)
        for (auto &series : cur) start = std::max(start, forward_fill(series));
    if (start + 2 > nt) throw DataError(source + ": fewer than two complete time steps across all currencies");
    const std::size_t steps = nt - start - 1;
    FxData d;
    d.currencies = names;
    d.panel.x = Tensor({4, steps, nc});
    d.panel.y = Tensor({nc, steps});
    d.close = Tensor({nc, steps + 1});
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t f = 0; f < 4; ++f) {
            std::vector<double> p(px[c][f].begin() + static_cast<std::ptrdiff_t>(start), px[c][f].end());
            const auto r = log_returns(p);
            for (std::size_t s = 0; s < steps; ++s) d.panel.x(f, s, c) = r[s];
            if (f == 3) {
                for (std::size_t s = 0; s < steps; ++s) d.panel.y(c, s) = r[s];
                for (std::size_t s = 0; s <= steps; ++s) d.close(c, s) = p[s];
            }
        }
    }
    d.panel.features = {"open", "high", "low", "close"};
    d.panel.entities = names;
    d.panel.times.assign(times.begin() + static_cast<std::ptrdiff_t>(start + 1), times.end());
    return d;
}

inline FxData load_fx(const std::string &path, const std::vector<std::string> &currencies = {}) {
    return load_fx_table(read_csv_file(path), currencies, path);
}

/// Spot and forward quotes "base,quote,spot,forward" arranged as N x N
/// matrices in the given currency order; pairs not listed get spot =
/// forward = 1 (no carry).
struct CarryQuotes {
    Tensor spot;
    Tensor forward;
};

inline CarryQuotes load_carry_table(const CsvTable &t, const std::vector<std::string> &currencies,
                                    const std::string &source = "carry") {
    const std::size_t n = currencies.size();
    CarryQuotes q{Tensor({n, n}, 1.0), Tensor({n, n}, 1.0)};
    const std::size_t cb = t.column("base"), cq = t.column("quote"), cs = t.column("spot"), cf = t.column("forward");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto &r = t.rows[i];
        const std::size_t a = detail::position(currencies, r[cb]), b = detail::position(currencies, r[cq]);
        if (a == n || b == n) continue;
        q.spot(a, b) = parse_number(r[cs], detail::where(source, i));
        q.forward(a, b) = parse_number(r[cf], detail::where(source, i));
        if (!(q.spot(a, b) > 0.0) || !std::isfinite(q.forward(a, b)))
            throw DataError(detail::where(source, i) + ": spot must be positive and forward finite");
    }
    return q;
}

inline CarryQuotes load_carry(const std::string &path, const std::vector<std::string> &currencies) {
    return load_carry_table(read_csv_file(path), currencies, path);
}

// ---------------------------------------------------------------------------
// EEG: confused-student recordings, one row per subject, video and second.

inline std::vector<std::string> eeg_feature_columns() {
    return {"Attention", "Mediation", "Raw", "Delta", "Theta", "Alpha1", "Alpha2", "Beta1", "Beta2", "Gamma1", "Gamma2"};
}

struct EegData {
    /// One panel per video: x (11, T_v, S), y (S, T_v) holding each
    /// subject's label for that video.
    std::vector<Panel> videos;
    std::vector<std::string> subjects;
    /// Demographic vectors per subject (age, one-hot ethnicity, one-hot
    /// gender); empty when no demographics table was given.
    std::vector<std::vector<double>> demographics;
};

inline std::string eeg_id(const std::string &cell) {
    try {
        const double v = std::stod(cell);
        if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    } catch (const std::exception &) {
    }
    return cell;
}

inline EegData load_eeg_tables(CsvTable eeg, std::optional<CsvTable> demo, const std::vector<std::string> &subjects = {},
                               const std::string &label_column = "user-definedlabeln", const std::string &source = "eeg") {
    detail::trim_table(eeg);
    const std::size_t c_sub = eeg.column("SubjectID"), c_vid = eeg.column("VideoID"), c_lab = eeg.column(label_column);
    std::vector<std::size_t> c_feat;
    for (const auto &f : eeg_feature_columns()) c_feat.push_back(eeg.column(f));
    std::vector<std::string> seen_sub, videos;
    for (const auto &r : eeg.rows) {
        const std::string s = eeg_id(r[c_sub]), v = eeg_id(r[c_vid]);
        if (std::find(seen_sub.begin(), seen_sub.end(), s) == seen_sub.end()) seen_sub.push_back(s);
        if (std::find(videos.begin(), videos.end(), v) == videos.end()) videos.push_back(v);
    }
    EegData d;
    d.subjects = detail::resolve_order(seen_sub, subjects, "subject");
    const std::size_t ns = d.subjects.size(), nf = c_feat.size();
    for (const auto &v : videos) {
        std::vector<std::vector<std::vector<double>>> rows(ns);
        std::vector<double> label(ns, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < eeg.rows.size(); ++i) {
            const auto &r = eeg.rows[i];
            if (eeg_id(r[c_vid]) != v) continue;
            const std::size_t s = detail::position(d.subjects, eeg_id(r[c_sub]));
            if (s == ns) continue;
            std::vector<double> f;
            for (auto c : c_feat) f.push_back(parse_number(r[c], detail::where(source, i)));
            rows[s].push_back(std::move(f));
            label[s] = parse_number(r[c_lab], detail::where(source, i));
        }
        std::size_t steps = rows[0].size();
        for (const auto &r : rows) steps = std::min(steps, r.size());
        if (steps == 0) continue;
        Panel p;
        p.x = Tensor({nf, steps, ns});
        p.y = Tensor({ns, steps});
        for (std::size_t s = 0; s < ns; ++s) {
            std::vector<std::vector<double>> cols(nf);
            for (std::size_t t = 0; t < steps; ++t)
                for (std::size_t f = 0; f < nf; ++f) cols[f].push_back(rows[s][t][f]);
            for (std::size_t f = 0; f < nf; ++f) {
                if (forward_fill(cols[f]) != 0)
                    throw DataError(source + ": subject " + d.subjects[s] + " video " + v + " starts with missing " +
                                    eeg_feature_columns()[f]);
                for (std::size_t t = 0; t < steps; ++t) p.x(f, t, s) = cols[f][t];
            }
            for (std::size_t t = 0; t < steps; ++t) p.y(s, t) = label[s];
        }
        p.features = eeg_feature_columns();
        p.entities = d.subjects;
        for (std::size_t t = 0; t < steps; ++t) p.times.push_back("video" + v + ":" + std::to_string(t));
        d.videos.push_back(std::move(p));
    }
    if (d.videos.empty()) throw DataError(source + ": no video has recordings for every subject");
    if (demo) {
        detail::trim_table(*demo);
        const std::size_t c_id = demo->column("subject ID"), c_age = demo->column("age");
        const std::size_t c_eth = demo->column("ethnicity"), c_gen = demo->column("gender");
        std::vector<std::string> eth, gen;
        for (const auto &r : demo->rows) {
            eth.push_back(r[c_eth]);
            gen.push_back(r[c_gen]);
        }
        OneHotEncoder e_eth = OneHotEncoder::fit(eth), e_gen = OneHotEncoder::fit(gen);
        for (const auto &s : d.subjects) {
            bool found = false;
            for (std::size_t i = 0; i < demo->rows.size(); ++i) {
                const auto &r = demo->rows[i];
                if (eeg_id(r[c_id]) != s) continue;
                std::vector<double> f{parse_number(r[c_age], detail::where("demographics", i))};
                for (double x : e_eth.encode(r[c_eth])) f.push_back(x);
                for (double x : e_gen.encode(r[c_gen])) f.push_back(x);
                d.demographics.push_back(std::move(f));
                found = true;
                break;
            }
            if (!found) throw DataError("demographics table has no row for subject " + s);
        }
    }
    return d;
}

inline EegData load_eeg(const std::string &eeg_path, const std::string &demographics_path = "",
                        const std::vector<std::string> &subjects = {},
                        const std::string &label_column = "user-definedlabeln") {
    std::optional<CsvTable> demo;
    if (!demographics_path.empty()) demo = read_csv_file(demographics_path);
    return load_eeg_tables(read_csv_file(eeg_path), std::move(demo), subjects, label_column, eeg_path);
}

// ---------------------------------------------------------------------------
// Temperature: "dt,AverageTemperature,AverageTemperatureUncertainty,City,
// Country,Latitude,Longitude" with coordinates such as 42.59N / 72.00W.

inline double parse_coordinate(const std::string &cell, const std::string &where) {
    if (cell.empty()) throw DataError(where + ": empty coordinate");
    const char h = cell.back();
    double sign = 1.0;
    std::string num = cell;
    if (h == 'N' || h == 'E' || h == 'S' || h == 'W') {
        num.pop_back();
        if (h == 'S' || h == 'W') sign = -1.0;
    }
    const double v = parse_number(num, where);
    if (!std::isfinite(v)) throw DataError(where + ": bad coordinate '" + cell + "'");
    return sign * v;
}

struct TemperatureData {
    /// x (3, T, C): temperature, uncertainty, month code; y = temperature (C, T).
    Panel panel;
    /// (latitude, longitude) per city.
    std::vector<std::vector<double>> coordinates;
};

struct TemperatureOptions {
    std::string country = "United States";
    std::size_t cities = 92;
    /// Keep only the most recent steps (0 = all complete steps).
    std::size_t max_steps = 0;
};

inline TemperatureData load_temperature_table(const CsvTable &t, const TemperatureOptions &opt = {},
                                              const std::string &source = "temperature") {
    const std::size_t c_dt = t.column("dt"), c_avg = t.column("AverageTemperature"),
                      c_unc = t.column("AverageTemperatureUncertainty"), c_city = t.column("City"),
                      c_cty = t.column("Country"), c_lat = t.column("Latitude"), c_lon = t.column("Longitude");
    std::map<std::string, std::size_t> date_index;
    std::vector<std::string> keys;
    std::vector<std::vector<double>> coords;
    std::vector<std::size_t> row_city(t.rows.size(), SIZE_MAX);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto &r = t.rows[i];
        if (!opt.country.empty() && r[c_cty] != opt.country) continue;
        date_index.emplace(r[c_dt].substr(0, 7), 0);
        const std::string key = r[c_city] + " (" + r[c_lat] + " " + r[c_lon] + ")";
        std::size_t k = detail::position(keys, key);
        if (k == keys.size()) {
            keys.push_back(key);
            coords.push_back({parse_coordinate(r[c_lat], detail::where(source, i)),
                              parse_coordinate(r[c_lon], detail::where(source, i))});
        }
        row_city[i] = k;
    }
    if (keys.empty()) throw DataError(source + ": no rows for country '" + opt.country + "'");
    std::vector<std::string> dates;
    for (auto &[k, v] : date_index) {
        v = dates.size();
        dates.push_back(k);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t nk = keys.size(), nd = dates.size();
    std::vector<std::vector<double>> temp(nk, std::vector<double>(nd, nan)), unc = temp;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (row_city[i] == SIZE_MAX) continue;
        const auto &r = t.rows[i];
        const std::size_t d = date_index[r[c_dt].substr(0, 7)];
        temp[row_city[i]][d] = parse_number(r[c_avg], detail::where(source, i));
        unc[row_city[i]][d] = parse_number(r[c_unc], detail::where(source, i));
    }
    // most complete cities first; ties by name
    std::vector<std::size_t> order(nk);
    std::vector<std::size_t> complete(nk, 0);
    for (std::size_t k = 0; k < nk; ++k) {
        order[k] = k;
        for (double v : temp[k]) complete[k] += std::isfinite(v);
    }
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return complete[a] != complete[b] ? complete[a] > complete[b] : keys[a] < keys[b];
    });
    if (order.size() < opt.cities)
        throw DataError(source + ": only " + std::to_string(order.size()) + " cities available, " +
                        std::to_string(opt.cities) + " requested");
    order.resize(opt.cities);
    std::size_t start = 0;
    for (auto k : order) start = std::max({start, forward_fill(temp[k]), forward_fill(unc[k])});
    if (start >= nd) throw DataError(source + ": selected cities share no complete month");
    if (opt.max_steps && nd - start > opt.max_steps) start = nd - opt.max_steps;
    const std::size_t steps = nd - start, nc = order.size();
    TemperatureData d;
    d.panel.x = Tensor({3, steps, nc});
    d.panel.y = Tensor({nc, steps});
    for (std::size_t c = 0; c < nc; ++c) {
        const std::size_t k = order[c];
        for (std::size_t s = 0; s < steps; ++s) {
            const std::string &date = dates[start + s];
            const double month = parse_number(date.substr(5, 2), source + " date " + date);
            d.panel.x(0, s, c) = temp[k][start + s];
            d.panel.x(1, s, c) = unc[k][start + s];
            d.panel.x(2, s, c) = month_sin(month);
            d.panel.y(c, s) = temp[k][start + s];
        }
        d.panel.entities.push_back(keys[k]);
        d.coordinates.push_back(coords[k]);
    }
    d.panel.features = {"AverageTemperature", "AverageTemperatureUncertainty", "month_sin"};
    d.panel.times.assign(dates.begin() + static_cast<std::ptrdiff_t>(start), dates.end());
    return d;
}

inline TemperatureData load_temperature(const std::string &path, const TemperatureOptions &opt = {}) {
    return load_temperature_table(read_csv_file(path), opt, path);
}

// ---------------------------------------------------------------------------
// Air quality: Beijing multi-site hourly records with a "station" column.

inline std::vector<std::string> airquality_numeric_columns() {
    return {"PM2.5", "PM10", "SO2", "NO2", "CO", "O3", "TEMP", "PRES", "DEWP", "RAIN", "WSPM"};
}

struct AirQualityData {
    /// x (27, T, S): 11 numeric columns then 16 wind-direction indicators;
    /// y = PM2.5 (S, T).
    Panel panel;
    std::size_t unseen_wind_directions = 0;
};

struct AirQualityOptions {
    std::vector<std::string> stations;
    std::size_t max_steps = 0;
};

inline AirQualityData load_airquality_table(const CsvTable &t, const AirQualityOptions &opt = {},
                                            const std::string &source = "airquality") {
    const std::size_t c_y = t.column("year"), c_m = t.column("month"), c_d = t.column("day"), c_h = t.column("hour"),
                      c_wd = t.column("wd"), c_st = t.column("station");
    std::vector<std::size_t> c_num;
    for (const auto &c : airquality_numeric_columns()) c_num.push_back(t.column(c));
    auto stamp = [&](const std::vector<std::string> &r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:00", std::stoi(r[c_y]), std::stoi(r[c_m]),
                      std::stoi(r[c_d]), std::stoi(r[c_h]));
        return std::string(buf);
    };
    std::map<std::string, std::size_t> time_index;
    std::vector<std::string> seen;
    std::vector<std::string> stamps(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        try {
            stamps[i] = stamp(t.rows[i]);
        } catch (const std::exception &) {
            throw DataError(detail::where(source, i) + ": bad date fields");
        }
        time_index.emplace(stamps[i], 0);
        const auto &s = t.rows[i][c_st];
        if (std::find(seen.begin(), seen.end(), s) == seen.end()) seen.push_back(s);
    }
    const auto stations = detail::resolve_order(seen, opt.stations, "station");
    std::vector<std::string> times;
    for (auto &[k, v] : time_index) {
        v = times.size();
        times.push_back(k);
    }
    const std::size_t ns = stations.size(), nt = times.size(), nn = c_num.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<std::vector<double>>> num(ns, std::vector<std::vector<double>>(nn, std::vector<double>(nt, nan)));
    std::vector<std::vector<std::string>> wd(ns, std::vector<std::string>(nt));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto &r = t.rows[i];
        const std::size_t s = detail::position(stations, r[c_st]);
        if (s == ns) continue;
        const std::size_t ti = time_index[stamps[i]];
        for (std::size_t f = 0; f < nn; ++f) num[s][f][ti] = parse_number(r[c_num[f]], detail::where(source, i));
        wd[s][ti] = r[c_wd];
    }
    std::size_t start = 0;
    for (std::size_t s = 0; s < ns; ++s) {
        for (auto &series : num[s]) start = std::max(start, forward_fill(series));
        start = std::max(start, forward_fill(wd[s]));
    }
    if (start >= nt) throw DataError(source + ": stations share no complete hour");
    if (opt.max_steps && nt - start > opt.max_steps) start = nt - opt.max_steps;
    const std::size_t steps = nt - start;
    OneHotEncoder enc(compass_points());
    AirQualityData d;
    d.panel.x = Tensor({nn + enc.width(), steps, ns});
    d.panel.y = Tensor({ns, steps});
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t k = 0; k < steps; ++k) {
            for (std::size_t f = 0; f < nn; ++f) d.panel.x(f, k, s) = num[s][f][start + k];
            const auto code = enc.encode(wd[s][start + k]);
            for (std::size_t f = 0; f < code.size(); ++f) d.panel.x(nn + f, k, s) = code[f];
            d.panel.y(s, k) = num[s][0][start + k];
        }
    d.unseen_wind_directions = enc.unseen_count();
    d.panel.features = airquality_numeric_columns();
    for (const auto &n : enc.column_names("wd")) d.panel.features.push_back(n);
    d.panel.entities = stations;
    d.panel.times.assign(times.begin() + static_cast<std::ptrdiff_t>(start), times.end());
    return d;
}

/// Accepts one combined file or one file per station.
inline AirQualityData load_airquality(const std::vector<std::string> &paths, const AirQualityOptions &opt = {}) {
    if (paths.empty()) throw DataError("no air-quality files given");
    CsvTable all = read_csv_file(paths.front());
    for (std::size_t i = 1; i < paths.size(); ++i) {
        CsvTable t = read_csv_file(paths[i]);
        if (t.header != all.header) throw DataError(paths[i] + ": header differs from " + paths.front());
        all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
    }
    return load_airquality_table(all, opt, paths.front());
}

} // namespace mgtn::data
