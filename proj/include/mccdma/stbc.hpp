#pragma once

#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "mccdma/spreading.hpp"
#include "mccdma/types.hpp"

namespace mccdma {

/// Per-antenna amplitude applied by the Alamouti encoder so that the total
/// transmit power over both antennas stays unitary.
inline const double kAlamoutiScale = 0.70710678118654752440;

/// Frequency response h_{tr,k} for every transmit/receive antenna pair and
/// subcarrier.
class ChannelMatrix {
public:
    ChannelMatrix() = default;
    ChannelMatrix(int nt, int nr, int nc)
        : nt_(nt), nr_(nr), nc_(nc), h_(static_cast<std::size_t>(nt) * nr * nc) {
        require(nt > 0 && nr > 0 && nc > 0, "channel matrix dimensions must be positive");
    }

    int nt() const { return nt_; }
    int nr() const { return nr_; }
    int nc() const { return nc_; }

    cplx& at(int t, int r, int k) { return h_[index(t, r, k)]; }
    cplx at(int t, int r, int k) const { return h_[index(t, r, k)]; }

    std::span<cplx> link(int t, int r) { return std::span<cplx>(h_).subspan(index(t, r, 0), nc_); }
    std::span<const cplx> link(int t, int r) const { return std::span<const cplx>(h_).subspan(index(t, r, 0), nc_); }

    /// sum_t sum_r |h_{tr,k}|^2
    double total_gain(int k) const;

    ChannelMatrix scaled(cplx factor) const;

private:
    std::size_t index(int t, int r, int k) const { return (static_cast<std::size_t>(t) * nr_ + r) * nc_ + k; }

    int nt_ = 0;
    int nr_ = 0;
    int nc_ = 0;
    CVec h_;
};

enum class Detector { kZf, kMmse };

Detector parse_detector(std::string_view name);
std::string_view to_string(Detector d);

/// Single-user detection coefficients
///   g_{tr,k} = h*_{tr,k} / (sum_t' sum_r' |h_{t'r',k}|^2 + 1/gamma)
/// with 1/gamma = 0 for ZF. Subcarriers whose ZF denominator falls below
/// kDegenerateThreshold get zero coefficients and are counted.
class EqualizerBank {
public:
    static constexpr double kDegenerateThreshold = 1e-30;

    EqualizerBank(Detector mode, double gamma, int nt, int nr, int nc);

    Detector mode() const { return mode_; }
    double gamma() const { return gamma_; }
    /// 1/gamma for MMSE, 0 for ZF.
    double inverse_gamma() const { return inverse_gamma_; }
    int nt() const { return nt_; }
    int nr() const { return nr_; }
    int nc() const { return nc_; }

    cplx& coeff(int t, int r, int k) { return g_[(static_cast<std::size_t>(t) * nr_ + r) * nc_ + k]; }
    cplx coeff(int t, int r, int k) const { return g_[(static_cast<std::size_t>(t) * nr_ + r) * nc_ + k]; }

    /// sum_t sum_r |h_{tr,k}|^2 of the channel the bank was built from.
    double total_gain(int k) const { return gain_[k]; }
    std::span<const double> total_gains() const { return gain_; }
    /// Amplitude of the desired chip after equalization: G/(G + 1/gamma),
    /// 0 on degenerate subcarriers.
    double chip_gain(int k) const;
    /// Noise variance of the equalized chip per unit input noise variance:
    /// G/(G + 1/gamma)^2, 0 on degenerate subcarriers.
    double noise_gain(int k) const;

    int degenerate_subcarriers() const { return degenerate_; }

private:
    friend EqualizerBank compute_equalizer(const ChannelMatrix&, Detector, double);

    Detector mode_;
    double gamma_;
    double inverse_gamma_;
    int nt_, nr_, nc_;
    CVec g_;
    std::vector<double> gain_;
    int degenerate_ = 0;
};

/// `gamma` is ignored for ZF. For MMSE it must be > 0; +infinity reduces to ZF
/// coefficients.
EqualizerBank compute_equalizer(const ChannelMatrix& channel, Detector mode,
                                double gamma = std::numeric_limits<double>::infinity());

/// Signals of one subcarrier set at the two slots of an Alamouti pair.
struct SlotPair {
    CVec first;   // time u
    CVec second;  // time u + Tx
};

/// Alamouti encoding, already scaled by kAlamoutiScale:
///   antenna 1: (s1, -s2*), antenna 2: (s2, s1*).
struct AlamoutiOutput {
    SlotPair antenna1;
    SlotPair antenna2;
};

AlamoutiOutput alamouti_encode(std::span<const cplx> s1, std::span<const cplx> s2);

/// Encodes a single-antenna logical chip grid into a two-antenna grid,
/// pairing OFDM symbols (2p, 2p+1) as (s1, s2).
ResourceGrid alamouti_encode_grid(const ResourceGrid& logical);

/// Alamouti combining across receive antennas:
///   z1 = sum_r g1r y_r(u) + g2r* y_r(u+Tx)*
///   z2 = sum_r g2r y_r(u) - g1r* y_r(u+Tx)*
/// The bank must be built from the effective channel (including
/// kAlamoutiScale) for the output to be aligned with (s1, s2).
SlotPair combine(std::span<const SlotPair> received, const EqualizerBank& bank);

/// Single transmit antenna: z = sum_r g_r y_r.
CVec equalize_single(std::span<const CVec> received, const EqualizerBank& bank);

/// rho = Lc / sum_k G_k/(G_k + 1/gamma) over the given chip gains G_k.
double rho_from_gains(std::span<const double> total_gains, double inverse_gamma);

/// rho of a spread symbol occupying `chip_subcarriers` of `bank`.
double compute_rho(const EqualizerBank& bank, std::span<const int> chip_subcarriers);

}  // namespace mccdma
