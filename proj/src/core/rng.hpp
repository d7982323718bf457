#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace caa {

// splitmix64; used to derive independent child seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t tag) {
    return mix64(mix64(master) ^ mix64(tag * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::uint64_t child_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return child_seed(master, h);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

} // namespace caa
