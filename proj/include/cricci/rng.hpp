#pragma once

#include <cstdint>
#include <random>

namespace cricci {

// splitmix64, used to spread a (seed, stream) pair into independent engine
// seeds. Trial k of a seeded sweep always sees the same substream no matter
// how trials are scheduled across workers.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ stream));
}

} // namespace cricci
