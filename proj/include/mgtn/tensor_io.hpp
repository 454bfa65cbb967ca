#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "mgtn/tensor.hpp"

namespace mgtn {

// Two on-disk layouts, both "order, shape, then data in Little-Endian linear
// order":
//
//   text:    mgtn-tensor 1
//            order <N>
//            shape <I_1> ... <I_N>
//            <one value per line, %.17g>
//
//   binary:  8-byte magic "MGTNTBIN", uint64 order, uint64 shape[order],
//            float64 data[prod(shape)]; host byte order (little-endian).

inline constexpr char kTensorTextMagic[] = "mgtn-tensor";
inline constexpr char kTensorBinaryMagic[8] = {'M', 'G', 'T', 'N', 'T', 'B', 'I', 'N'};

inline void write_tensor_text(std::ostream &os, const Tensor &t) {
    os << kTensorTextMagic << " 1\norder " << t.order() << "\nshape";
    for (std::size_t d : t.shape()) os << ' ' << d;
    os << '\n' << std::setprecision(17);
    for (double v : t.data()) os << v << '\n';
}

inline void write_tensor_binary(std::ostream &os, const Tensor &t) {
    os.write(kTensorBinaryMagic, sizeof kTensorBinaryMagic);
    const std::uint64_t order = t.order();
    os.write(reinterpret_cast<const char *>(&order), sizeof order);
    for (std::size_t d : t.shape()) {
        const std::uint64_t d64 = d;
        os.write(reinterpret_cast<const char *>(&d64), sizeof d64);
    }
    os.write(reinterpret_cast<const char *>(t.data().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
}

inline Tensor read_tensor(std::istream &is) {
    char head[8] = {};
    is.read(head, sizeof head);
    if (is.gcount() == 8 && std::memcmp(head, kTensorBinaryMagic, 8) == 0) {
        std::uint64_t order = 0;
        if (!is.read(reinterpret_cast<char *>(&order), sizeof order) || order > 64)
            throw DataError("binary tensor: bad order field");
        Shape shape(order);
        for (auto &d : shape) {
            std::uint64_t d64 = 0;
            if (!is.read(reinterpret_cast<char *>(&d64), sizeof d64) || d64 == 0)
                throw DataError("binary tensor: bad shape field");
            d = d64;
        }
        std::vector<double> data(shape_size(shape));
        if (!is.read(reinterpret_cast<char *>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double))))
            throw DataError("binary tensor: truncated data");
        return Tensor(std::move(shape), std::move(data));
    }

    std::string text(head, static_cast<std::size_t>(is.gcount()));
    is.clear();
    text += std::string(std::istreambuf_iterator<char>(is), {});
    std::istringstream in(text);
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != kTensorTextMagic || version != 1)
        throw DataError("not a tensor file (missing '" + std::string(kTensorTextMagic) + " 1' header)");
    std::size_t order = 0;
    if (!(in >> word >> order) || word != "order") throw DataError("tensor file: expected 'order <N>'");
    if (!(in >> word) || word != "shape") throw DataError("tensor file: expected 'shape ...'");
    Shape shape(order);
    for (auto &d : shape)
        if (!(in >> d) || d == 0) throw DataError("tensor file: bad shape entry");
    std::vector<double> data(shape_size(shape));
    for (std::size_t i = 0; i < data.size(); ++i) {
        // operator>> rejects "nan"/"inf", so parse tokens explicitly.
        std::string tok;
        if (!(in >> tok)) throw DataError("tensor file: expected " + std::to_string(data.size()) +
                                          " values, found " + std::to_string(i));
        try {
            data[i] = std::stod(tok);
        } catch (const std::exception &) {
            throw DataError("tensor file: bad value '" + tok + "' at position " + std::to_string(i));
        }
    }
    return Tensor(std::move(shape), std::move(data));
}

inline Tensor load_tensor(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open tensor file " + path);
    return read_tensor(f);
}

inline void save_tensor(const std::string &path, const Tensor &t, bool binary = false) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write tensor file " + path);
    binary ? write_tensor_binary(f, t) : write_tensor_text(f, t);
}

} // namespace mgtn
