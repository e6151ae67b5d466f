#pragma once

#include <cstdint>
#include <random>

namespace sfec {

using Engine = std::mt19937_64;

/// Independent random streams carved out of one trial seed.
enum class Stream : std::uint64_t { Channel = 1, Signal = 2, Noise = 3 };

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(mix64(a) ^ (b * 0xd6e8feb86659fd93ULL + 0x632be59bd9b4e019ULL));
}

/// Seed of trial `index` under `master_seed`.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return combine_seed(master_seed, index);
}

inline Engine make_engine(std::uint64_t trial_seed, Stream stream) {
    return Engine{combine_seed(trial_seed, static_cast<std::uint64_t>(stream))};
}

}  // namespace sfec
