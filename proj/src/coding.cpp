#include "mccdma/coding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mccdma/random.hpp"

namespace mccdma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Branch {
    int next;
    int parity;
};

// feedback 1 + D^2 + D^3 (13), feedforward 1 + D + D^3 (15).
// State bits (s1 s2 s3) with s1 the most recent register, packed s1<<2|s2<<1|s3.
Branch rsc_step(int state, int input) {
    const int s1 = (state >> 2) & 1, s2 = (state >> 1) & 1, s3 = state & 1;
    const int a = input ^ s2 ^ s3;
    return {(a << 2) | (state >> 1), a ^ s1 ^ s3};
}

// Input that drives the register towards zero during termination.
int tail_input(int state) { return ((state >> 1) ^ state) & 1; }

struct RscOutput {
    Bits parity;
    Bits tail;  // x z x z x z
};

RscOutput rsc_encode(std::span<const std::uint8_t> bits) {
    RscOutput out;
    out.parity.resize(bits.size());
    int state = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        const Branch b = rsc_step(state, bits[k] & 1);
        out.parity[k] = static_cast<std::uint8_t>(b.parity);
        state = b.next;
    }
    for (int i = 0; i < kRscMemory; ++i) {
        const int u = tail_input(state);
        const Branch b = rsc_step(state, u);
        out.tail.push_back(static_cast<std::uint8_t>(u));
        out.tail.push_back(static_cast<std::uint8_t>(b.parity));
        state = b.next;
    }
    return out;
}

__extension__ using Uint128 = unsigned __int128;

// Multiply-shift range reduction; bias is below 2^-40 for interleaver sizes.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<Uint128>(rng()) * bound) >> 64);
}

}  // namespace

void TurboConfig::validate() const {
    require(block_length > 0, "turbo block length must be positive");
    require(static_cast<int>(interleaver.size()) == block_length, "turbo interleaver length mismatch");
    std::vector<char> seen(block_length, 0);
    for (int p : interleaver) {
        require(p >= 0 && p < block_length && !seen[p], "turbo interleaver is not a permutation");
        seen[p] = 1;
    }
    require(iterations >= 1, "turbo iterations must be >= 1");
}

std::vector<int> parity_preserving_interleaver(int block_length, std::uint64_t seed) {
    require(block_length > 0, "interleaver length must be positive");
    Rng rng(seed);
    std::vector<int> perm(block_length);
    std::iota(perm.begin(), perm.end(), 0);
    for (int parity = 0; parity < 2; ++parity) {
        // Fisher-Yates over the positions with this parity.
        const int count = (block_length - parity + 1) / 2;
        for (int i = count - 1; i > 0; --i) {
            const int j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(i) + 1));
            std::swap(perm[2 * i + parity], perm[2 * j + parity]);
        }
    }
    return perm;
}

TurboConfig make_turbo_config(int block_length, std::uint64_t interleaver_seed, int iterations) {
    TurboConfig cfg;
    cfg.block_length = block_length;
    cfg.interleaver = parity_preserving_interleaver(block_length, interleaver_seed);
    cfg.iterations = iterations;
    cfg.validate();
    return cfg;
}

MotherCodeword turbo_encode_unpunctured(std::span<const std::uint8_t> bits, const TurboConfig& config) {
    const int k_len = config.block_length;
    require(static_cast<int>(bits.size()) == k_len,
            "turbo_encode: expected " + std::to_string(k_len) + " bits, got " + std::to_string(bits.size()));
    require(static_cast<int>(config.interleaver.size()) == k_len, "turbo_encode: interleaver length mismatch");
    MotherCodeword cw;
    cw.systematic.assign(bits.begin(), bits.end());
    for (auto& b : cw.systematic) b &= 1;
    Bits permuted(k_len);
    for (int k = 0; k < k_len; ++k) permuted[k] = cw.systematic[config.interleaver[k]];
    RscOutput first = rsc_encode(cw.systematic);
    RscOutput second = rsc_encode(permuted);
    cw.parity1 = std::move(first.parity);
    cw.parity2 = std::move(second.parity);
    cw.tail = std::move(first.tail);
    cw.tail.insert(cw.tail.end(), second.tail.begin(), second.tail.end());
    return cw;
}

Bits puncture(const MotherCodeword& cw) {
    const std::size_t k_len = cw.systematic.size();
    require(cw.parity1.size() == k_len && cw.parity2.size() == k_len, "puncture: stream lengths differ");
    require(cw.tail.size() == static_cast<std::size_t>(kTurboTailBits), "puncture: wrong tail length");
    Bits out;
    out.reserve(2 * k_len + kTurboTailBits);
    for (std::size_t k = 0; k < k_len; ++k) {
        out.push_back(cw.systematic[k]);
        out.push_back(k % 2 == 0 ? cw.parity1[k] : cw.parity2[k]);
    }
    out.insert(out.end(), cw.tail.begin(), cw.tail.end());
    return out;
}

MotherLlrs depuncture(std::span<const double> llrs, int block_length) {
    require(block_length > 0, "depuncture: block length must be positive");
    require(static_cast<int>(llrs.size()) == punctured_length(block_length),
            "depuncture: expected " + std::to_string(punctured_length(block_length)) + " LLRs, got " +
                std::to_string(llrs.size()));
    MotherLlrs out;
    out.systematic.resize(block_length);
    out.parity1.assign(block_length, 0.0);
    out.parity2.assign(block_length, 0.0);
    for (int k = 0; k < block_length; ++k) {
        out.systematic[k] = llrs[2 * k];
        (k % 2 == 0 ? out.parity1 : out.parity2)[k] = llrs[2 * k + 1];
    }
    out.tail.assign(llrs.begin() + 2 * block_length, llrs.end());
    return out;
}

Bits turbo_encode(std::span<const std::uint8_t> bits, const TurboConfig& config) {
    return puncture(turbo_encode_unpunctured(bits, config));
}

TurboDecoder::TurboDecoder(TurboConfig config) : config_(std::move(config)) {
    config_.validate();
    const std::size_t steps = static_cast<std::size_t>(config_.block_length) + kRscMemory + 1;
    alpha_.resize(steps * kRscStates);
    beta_.resize(steps * kRscStates);
}

double TurboDecoder::max_star(double a, double b) const {
    const double m = std::max(a, b);
    if (!config_.log_map_correction || m == kNegInf) return m;
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

void TurboDecoder::siso(std::span<const double> sys, std::span<const double> par, std::span<const double> apriori,
                        std::span<const double> tail, std::span<double> posterior) {
    const int k_len = config_.block_length;
    const int steps = k_len + kRscMemory;
    auto alpha = [&](int k, int s) -> double& { return alpha_[static_cast<std::size_t>(k) * kRscStates + s]; };
    auto beta = [&](int k, int s) -> double& { return beta_[static_cast<std::size_t>(k) * kRscStates + s]; };
    // Branch metric 0.5 * (x_u * Lu + x_p * Lp) with x = +1 for bit 0.
    auto gamma = [](int u, int p, double lu, double lp) {
        return 0.5 * ((u ? -lu : lu) + (p ? -lp : lp));
    };
    auto step_llrs = [&](int k, double& lu, double& lp) {
        if (k < k_len) {
            lu = sys[k] + apriori[k];
            lp = par[k];
        } else {
            lu = tail[2 * (k - k_len)];
            lp = tail[2 * (k - k_len) + 1];
        }
    };

    for (int s = 0; s < kRscStates; ++s) alpha(0, s) = s == 0 ? 0.0 : kNegInf;
    for (int k = 0; k < steps; ++k) {
        double lu = 0, lp = 0;
        step_llrs(k, lu, lp);
        for (int s = 0; s < kRscStates; ++s) alpha(k + 1, s) = kNegInf;
        for (int s = 0; s < kRscStates; ++s) {
            const double a = alpha(k, s);
            if (a == kNegInf) continue;
            for (int u = 0; u < 2; ++u) {
                if (k >= k_len && u != tail_input(s)) continue;
                const Branch b = rsc_step(s, u);
                double& dst = alpha(k + 1, b.next);
                dst = max_star(dst, a + gamma(u, b.parity, lu, lp));
            }
        }
        double norm = kNegInf;
        for (int s = 0; s < kRscStates; ++s) norm = std::max(norm, alpha(k + 1, s));
        if (norm != kNegInf)
            for (int s = 0; s < kRscStates; ++s) alpha(k + 1, s) -= norm;
    }

    for (int s = 0; s < kRscStates; ++s) beta(steps, s) = s == 0 ? 0.0 : kNegInf;
    for (int k = steps - 1; k >= 0; --k) {
        double lu = 0, lp = 0;
        step_llrs(k, lu, lp);
        double norm = kNegInf;
        for (int s = 0; s < kRscStates; ++s) {
            double acc = kNegInf;
            for (int u = 0; u < 2; ++u) {
                if (k >= k_len && u != tail_input(s)) continue;
                const Branch b = rsc_step(s, u);
                const double bn = beta(k + 1, b.next);
                if (bn == kNegInf) continue;
                acc = max_star(acc, bn + gamma(u, b.parity, lu, lp));
            }
            beta(k, s) = acc;
            norm = std::max(norm, acc);
        }
        if (norm != kNegInf)
            for (int s = 0; s < kRscStates; ++s) beta(k, s) -= norm;
    }

    for (int k = 0; k < k_len; ++k) {
        const double lu = sys[k] + apriori[k];
        const double lp = par[k];
        double m0 = kNegInf, m1 = kNegInf;
        for (int s = 0; s < kRscStates; ++s) {
            const double a = alpha(k, s);
            if (a == kNegInf) continue;
            for (int u = 0; u < 2; ++u) {
                const Branch b = rsc_step(s, u);
                const double bn = beta(k + 1, b.next);
                if (bn == kNegInf) continue;
                const double metric = a + gamma(u, b.parity, lu, lp) + bn;
                if (u == 0)
                    m0 = max_star(m0, metric);
                else
                    m1 = max_star(m1, metric);
            }
        }
        posterior[k] = m0 - m1;
    }
}

TurboDecodeResult TurboDecoder::decode(std::span<const double> llrs) {
    const int k_len = config_.block_length;
    const MotherLlrs in = depuncture(llrs, k_len);
    const auto& pi = config_.interleaver;

    std::vector<double> sys2(k_len), apriori1(k_len, 0.0), apriori2(k_len), post1(k_len), post2(k_len),
        extrinsic2(k_len, 0.0);
    for (int k = 0; k < k_len; ++k) sys2[k] = in.systematic[pi[k]];
    const std::span<const double> tail1(in.tail.data(), 2 * kRscMemory);
    const std::span<const double> tail2(in.tail.data() + 2 * kRscMemory, 2 * kRscMemory);

    for (int it = 0; it < config_.iterations; ++it) {
        siso(in.systematic, in.parity1, apriori1, tail1, post1);
        for (int k = 0; k < k_len; ++k) apriori2[k] = post1[pi[k]] - in.systematic[pi[k]] - apriori1[pi[k]];
        siso(sys2, in.parity2, apriori2, tail2, post2);
        for (int k = 0; k < k_len; ++k) extrinsic2[k] = post2[k] - sys2[k] - apriori2[k];
        for (int k = 0; k < k_len; ++k) apriori1[pi[k]] = extrinsic2[k];
    }

    TurboDecodeResult result;
    result.posterior.resize(k_len);
    result.bits.resize(k_len);
    // The second decoder's output is systematic + both extrinsics of the last iteration.
    for (int k = 0; k < k_len; ++k) result.posterior[pi[k]] = post2[k];
    for (int k = 0; k < k_len; ++k) {
        const double l = result.posterior[k];
        result.posterior[k] = std::isfinite(l) ? l : (l > 0 ? 1e300 : -1e300);
        result.bits[k] = result.posterior[k] < 0 ? 1 : 0;
    }
    return result;
}

TurboDecodeResult turbo_decode(std::span<const double> llrs, const TurboConfig& config) {
    TurboDecoder decoder(config);
    return decoder.decode(llrs);
}

ChannelInterleaver::ChannelInterleaver(std::size_t length, std::uint64_t seed) : perm_(length) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = length; i > 1; --i) std::swap(perm_[i - 1], perm_[uniform_index(rng, i)]);
}

}  // namespace mccdma
