#pragma once

#include <cstdint>
#include <random>

namespace mccdma {

using Rng = std::mt19937_64;

/// Independent random stream families of one frame.
enum class StreamTag : std::uint64_t { kChannel = 1, kNoise = 2, kData = 3, kInterleaver = 4 };

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the stream keyed by (master seed, frame index, tag). Pure function,
/// so frames can be simulated in any order on any worker.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t frame, StreamTag tag) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ frame);
    return splitmix64(h ^ static_cast<std::uint64_t>(tag));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t frame, StreamTag tag) {
    return Rng(substream_seed(master, frame, tag));
}

}  // namespace mccdma
