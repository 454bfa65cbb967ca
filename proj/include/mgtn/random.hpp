#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "mgtn/tensor.hpp"

namespace mgtn {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives independent, reproducible generators ("init", "shuffle",
/// "explore", ...) from one experiment seed.
class SeedSequence {
public:
    explicit SeedSequence(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t stream_seed(std::string_view name) const {
        // FNV-1a over the stream name, mixed with the root seed.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return splitmix64(seed_ ^ splitmix64(h));
    }

    Rng stream(std::string_view name) const { return Rng(stream_seed(name)); }

private:
    std::uint64_t seed_;
};

inline Tensor random_uniform(const Shape &shape, Rng &rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(shape);
    for (double &v : t.data()) v = dist(rng);
    return t;
}

inline Tensor random_normal(const Shape &shape, Rng &rng, double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    Tensor t(shape);
    for (double &v : t.data()) v = dist(rng);
    return t;
}

} // namespace mgtn
