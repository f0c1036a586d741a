#pragma once

#include <cstdint>
#include <random>

namespace toroidqed {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent stream per (master seed, purpose tag, work-unit index). Streams
// depend only on these three numbers, never on scheduling order.
inline Rng make_stream(std::uint64_t master, std::uint64_t tag, std::uint64_t index) {
    const std::uint64_t s = splitmix64(master ^ splitmix64(tag ^ splitmix64(index)));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index)};
    return Rng(seq);
}

namespace stream_tag {
inline constexpr std::uint64_t trajectories = 1;
inline constexpr std::uint64_t detection = 2;
inline constexpr std::uint64_t control = 3;
}  // namespace stream_tag

}  // namespace toroidqed
