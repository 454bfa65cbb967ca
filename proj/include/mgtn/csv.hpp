#pragma once

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgtn/error.hpp"

namespace mgtn {

/// Header row plus string cells; enough for the experiment schemas
/// (comma separated, optional double quotes, no embedded newlines).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string &name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DataError("missing CSV column '" + name + "'");
    }

    bool has_column(const std::string &name) const {
        for (const auto &h : header)
            if (h == name) return true;
        return false;
    }
};

inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

inline CsvTable read_csv(std::istream &is, const std::string &source = "<stream>") {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw DataError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                            " fields, found " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw DataError(source + ": empty CSV file");
    return t;
}

inline CsvTable read_csv_file(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    return read_csv(f, path);
}

inline std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

inline void write_csv(std::ostream &os, const CsvTable &t) {
    auto row = [&](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_escape(cells[i]);
        os << '\n';
    };
    row(t.header);
    for (const auto &r : t.rows) row(r);
}

inline void write_csv_file(const std::string &path, const CsvTable &t) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write " + path);
    write_csv(f, t);
}

/// Parses a numeric cell; empty or "NA"/"nan" cells yield NaN (missing).
inline double parse_number(const std::string &cell, const std::string &where) {
    if (cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN") return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception &) {
        throw DataError(where + ": cannot parse number '" + cell + "'");
    }
}

/// Text that round-trips the double exactly.
inline std::string format_number(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

} // namespace mgtn
