#pragma once

#include <cstdint>
#include <random>

namespace capped_lsmc {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer. Used to turn (seed, index) pairs into well-mixed
/// engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream tags keep path streams, cap streams and run seeds disjoint.
inline constexpr std::uint64_t kPathStream = 0x5041544853ULL;  // "PATHS"
inline constexpr std::uint64_t kCapStream = 0x434150ULL;       // "CAP"
inline constexpr std::uint64_t kRunStream = 0x52554EULL;       // "RUN"

/// Seed of stream `index` under master `seed` and `tag`. A pure function of
/// its arguments, so any worker can build any stream without coordination.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed ^ splitmix64(tag)) + index);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return Engine(stream_seed(seed, tag, index));
}

/// Per-run seed of repetition `run` under a sweep's master seed.
constexpr std::uint64_t run_seed(std::uint64_t master, std::uint64_t run) noexcept {
    return stream_seed(master, kRunStream, run);
}

}  // namespace capped_lsmc
