#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mccdma/types.hpp"

namespace mccdma {

// Rate-1/3 parallel concatenation of two RSC(13,15) encoders (constraint
// length 4), each trellis-terminated, punctured to rate 1/2.
//
// Soft values are LLRs log P(b=0)/P(b=1) throughout.

inline constexpr int kRscMemory = 3;
inline constexpr int kRscStates = 8;
/// Three (systematic, parity) pairs per constituent encoder.
inline constexpr int kTurboTailBits = 4 * kRscMemory;

/// Length of the punctured codeword for K information bits.
inline constexpr int punctured_length(int block_length) { return 2 * block_length + kTurboTailBits; }

struct TurboConfig {
    int block_length = 0;
    /// Second encoder input k is information bit interleaver[k].
    std::vector<int> interleaver;
    int iterations = 6;
    /// Use the exact Jacobian logarithm (log-MAP) instead of max-log-MAP.
    bool log_map_correction = false;

    void validate() const;
};

/// Random permutation that maps even positions to even positions and odd to
/// odd, so that alternating parity puncturing leaves every information bit
/// with exactly one transmitted parity bit.
std::vector<int> parity_preserving_interleaver(int block_length, std::uint64_t seed);

TurboConfig make_turbo_config(int block_length, std::uint64_t interleaver_seed, int iterations = 6);

/// Unpunctured encoder output. `tail` is x1 z1 x1 z1 x1 z1 x2 z2 x2 z2 x2 z2.
struct MotherCodeword {
    Bits systematic;
    Bits parity1;
    Bits parity2;
    Bits tail;
};

struct MotherLlrs {
    std::vector<double> systematic;
    std::vector<double> parity1;
    std::vector<double> parity2;
    std::vector<double> tail;
};

MotherCodeword turbo_encode_unpunctured(std::span<const std::uint8_t> bits, const TurboConfig& config);

/// Keeps every systematic bit, parity1 at even and parity2 at odd positions,
/// interleaved as x_k p_k, followed by the unpunctured tail.
Bits puncture(const MotherCodeword& codeword);

/// Rebuilds mother-code LLRs with 0 at deleted positions.
MotherLlrs depuncture(std::span<const double> llrs, int block_length);

Bits turbo_encode(std::span<const std::uint8_t> bits, const TurboConfig& config);

struct TurboDecodeResult {
    Bits bits;
    std::vector<double> posterior;
};

/// Iterative max-log-MAP (or log-MAP) decoder. Holds scratch buffers; use
/// one instance per thread.
class TurboDecoder {
public:
    explicit TurboDecoder(TurboConfig config);

    const TurboConfig& config() const { return config_; }
    TurboDecodeResult decode(std::span<const double> llrs);

private:
    // Returns a-posteriori LLRs of the K information bits.
    void siso(std::span<const double> sys, std::span<const double> par, std::span<const double> apriori,
              std::span<const double> tail, std::span<double> posterior);
    double max_star(double a, double b) const;

    TurboConfig config_;
    std::vector<double> alpha_;
    std::vector<double> beta_;
};

TurboDecodeResult turbo_decode(std::span<const double> llrs, const TurboConfig& config);

/// Pseudo-random frame-level bit interleaver.
class ChannelInterleaver {
public:
    ChannelInterleaver(std::size_t length, std::uint64_t seed);

    std::size_t size() const { return perm_.size(); }
    /// out[i] = in[perm[i]]
    std::span<const std::size_t> permutation() const { return perm_; }

    template <typename T>
    std::vector<T> interleave(std::span<const T> in) const {
        require(in.size() == perm_.size(), "interleave: length mismatch");
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = in[perm_[i]];
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(std::span<const T> in) const {
        require(in.size() == perm_.size(), "deinterleave: length mismatch");
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[perm_[i]] = in[i];
        return out;
    }

private:
    std::vector<std::size_t> perm_;
};

}  // namespace mccdma
