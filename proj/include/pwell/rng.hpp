#pragma once

#include <cstdint>
#include <random>

namespace pwell {

// Counter-based seed splitter. Each purpose gets its own stream derived from
// the master seed, so adding a consumer never perturbs the others.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class SeedPurpose : std::uint64_t {
    InitialData = 1,
    DepthSearch = 2,
    EmbeddingStarts = 3,
    PropertyFields = 4,
};

inline std::mt19937_64 make_stream(std::uint64_t master_seed, SeedPurpose purpose,
                                   std::uint64_t counter = 0) {
    std::uint64_t s = splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(purpose)));
    s = splitmix64(s ^ counter);
    return std::mt19937_64(s);
}

} // namespace pwell
