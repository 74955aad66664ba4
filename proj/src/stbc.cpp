#include "mccdma/stbc.hpp"

#include <cmath>
#include <string>

namespace mccdma {

double ChannelMatrix::total_gain(int k) const {
    double g = 0.0;
    for (int t = 0; t < nt_; ++t)
        for (int r = 0; r < nr_; ++r) g += std::norm(at(t, r, k));
    return g;
}

ChannelMatrix ChannelMatrix::scaled(cplx factor) const {
    ChannelMatrix out = *this;
    for (auto& h : out.h_) h *= factor;
    return out;
}

Detector parse_detector(std::string_view name) {
    if (name == "zf") return Detector::kZf;
    if (name == "mmse") return Detector::kMmse;
    throw InvalidParameter("unknown detector '" + std::string(name) + "' (expected zf or mmse)");
}

std::string_view to_string(Detector d) { return d == Detector::kZf ? "zf" : "mmse"; }

EqualizerBank::EqualizerBank(Detector mode, double gamma, int nt, int nr, int nc)
    : mode_(mode), gamma_(gamma), inverse_gamma_(0.0), nt_(nt), nr_(nr), nc_(nc),
      g_(static_cast<std::size_t>(nt) * nr * nc), gain_(nc, 0.0) {
    if (mode == Detector::kMmse) {
        require(gamma > 0.0, "MMSE equalizer needs gamma > 0");
        inverse_gamma_ = std::isinf(gamma) ? 0.0 : 1.0 / gamma;
    }
}

double EqualizerBank::chip_gain(int k) const {
    const double den = gain_[k] + inverse_gamma_;
    if (den < kDegenerateThreshold) return 0.0;
    return gain_[k] / den;
}

double EqualizerBank::noise_gain(int k) const {
    const double den = gain_[k] + inverse_gamma_;
    if (den < kDegenerateThreshold) return 0.0;
    return gain_[k] / (den * den);
}

EqualizerBank compute_equalizer(const ChannelMatrix& channel, Detector mode, double gamma) {
    EqualizerBank bank(mode, gamma, channel.nt(), channel.nr(), channel.nc());
    for (int k = 0; k < channel.nc(); ++k) {
        const double g = channel.total_gain(k);
        require(std::isfinite(g), "channel response is not finite");
        bank.gain_[k] = g;
        const double den = g + bank.inverse_gamma_;
        if (den < EqualizerBank::kDegenerateThreshold) {
            ++bank.degenerate_;
            continue;
        }
        for (int t = 0; t < channel.nt(); ++t)
            for (int r = 0; r < channel.nr(); ++r) bank.coeff(t, r, k) = std::conj(channel.at(t, r, k)) / den;
    }
    return bank;
}

AlamoutiOutput alamouti_encode(std::span<const cplx> s1, std::span<const cplx> s2) {
    require(s1.size() == s2.size(), "alamouti_encode: s1 and s2 lengths differ");
    const std::size_t n = s1.size();
    AlamoutiOutput out;
    out.antenna1.first.resize(n);
    out.antenna1.second.resize(n);
    out.antenna2.first.resize(n);
    out.antenna2.second.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.antenna1.first[k] = kAlamoutiScale * s1[k];
        out.antenna1.second[k] = -kAlamoutiScale * std::conj(s2[k]);
        out.antenna2.first[k] = kAlamoutiScale * s2[k];
        out.antenna2.second[k] = kAlamoutiScale * std::conj(s1[k]);
    }
    return out;
}

ResourceGrid alamouti_encode_grid(const ResourceGrid& logical) {
    require(logical.antennas() == 1, "alamouti_encode_grid: expected a single-antenna logical grid");
    require(logical.symbols() % 2 == 0, "alamouti_encode_grid: odd number of OFDM symbols");
    ResourceGrid out(2, logical.subcarriers(), logical.symbols());
    for (int n = 0; n < logical.symbols(); n += 2) {
        const auto s1 = logical.column(0, n);
        const auto s2 = logical.column(0, n + 1);
        auto a1u = out.column(0, n), a1v = out.column(0, n + 1);
        auto a2u = out.column(1, n), a2v = out.column(1, n + 1);
        for (int k = 0; k < logical.subcarriers(); ++k) {
            a1u[k] = kAlamoutiScale * s1[k];
            a1v[k] = -kAlamoutiScale * std::conj(s2[k]);
            a2u[k] = kAlamoutiScale * s2[k];
            a2v[k] = kAlamoutiScale * std::conj(s1[k]);
        }
    }
    return out;
}

SlotPair combine(std::span<const SlotPair> received, const EqualizerBank& bank) {
    require(bank.nt() == 2, "combine: Alamouti combining needs a two-transmit-antenna bank");
    require(static_cast<int>(received.size()) == bank.nr(),
            "combine: " + std::to_string(received.size()) + " receive antennas, bank has " +
                std::to_string(bank.nr()));
    const int nc = bank.nc();
    SlotPair z{CVec(nc), CVec(nc)};
    for (int r = 0; r < bank.nr(); ++r) {
        const auto& y = received[r];
        require(static_cast<int>(y.first.size()) == nc && static_cast<int>(y.second.size()) == nc,
                "combine: received slot length does not match the bank");
        for (int k = 0; k < nc; ++k) {
            const cplx g1 = bank.coeff(0, r, k);
            const cplx g2 = bank.coeff(1, r, k);
            const cplx yu = y.first[k];
            const cplx yv = std::conj(y.second[k]);
            z.first[k] += g1 * yu + std::conj(g2) * yv;
            z.second[k] += g2 * yu - std::conj(g1) * yv;
        }
    }
    return z;
}

CVec equalize_single(std::span<const CVec> received, const EqualizerBank& bank) {
    require(bank.nt() == 1, "equalize_single: bank must have one transmit antenna");
    require(static_cast<int>(received.size()) == bank.nr(), "equalize_single: receive antenna count mismatch");
    const int nc = bank.nc();
    CVec z(nc);
    for (int r = 0; r < bank.nr(); ++r) {
        require(static_cast<int>(received[r].size()) == nc, "equalize_single: length mismatch");
        for (int k = 0; k < nc; ++k) z[k] += bank.coeff(0, r, k) * received[r][k];
    }
    return z;
}

double rho_from_gains(std::span<const double> total_gains, double inverse_gamma) {
    require(!total_gains.empty(), "rho: empty chip set");
    double acc = 0.0;
    for (double g : total_gains) {
        const double den = g + inverse_gamma;
        if (den >= EqualizerBank::kDegenerateThreshold) acc += g / den;
    }
    // Every chip zeroed by the degenerate-subcarrier guard: nothing to rescale.
    if (acc <= 0.0) return 1.0;
    return static_cast<double>(total_gains.size()) / acc;
}

double compute_rho(const EqualizerBank& bank, std::span<const int> chip_subcarriers) {
    require(!chip_subcarriers.empty(), "compute_rho: empty chip set");
    std::vector<double> gains;
    gains.reserve(chip_subcarriers.size());
    for (int k : chip_subcarriers) {
        require(k >= 0 && k < bank.nc(), "compute_rho: subcarrier index out of range");
        gains.push_back(bank.total_gain(k));
    }
    return rho_from_gains(gains, bank.inverse_gamma());
}

}  // namespace mccdma
