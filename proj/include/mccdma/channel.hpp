#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mccdma/random.hpp"
#include "mccdma/spreading.hpp"
#include "mccdma/stbc.hpp"
#include "mccdma/types.hpp"

namespace mccdma {

inline constexpr double kSpeedOfLight = 3.0e8;

struct Tap {
    double delay_s = 0.0;
    double power = 0.0;  // linear, profile total is 1
};

/// Average power delay profile. Taps are sorted by delay and powers sum to 1.
struct ChannelProfile {
    std::vector<Tap> taps;
    std::string source;

    double mean_delay_s() const;
    double rms_delay_spread_s() const;
    double max_delay_s() const { return taps.empty() ? 0.0 : taps.back().delay_s; }
};

/// Parses `delay_ns power_db` lines (`#` starts a comment) and normalizes the
/// powers to unit total.
ChannelProfile parse_profile(std::string_view text, std::string source = "<memory>");
ChannelProfile load_profile(const std::filesystem::path& path);

/// ETSI BRAN E (HIPERLAN/2 outdoor) with the two taps closer than one sample
/// period at 57.6 MHz merged, giving 17 taps. Identical to data/bran_e.profile.
ChannelProfile bran_e_profile();

/// Spatial and kinematic parameters of the geometric channel. Transmit
/// antennas are at the base station, receive antennas at the mobile.
struct SpatialConfig {
    int nt = 2;
    int nr = 2;
    int num_subrays = 20;
    double bs_angle_spread_deg = 21.4;   // composite, at BS
    double ms_angle_spread_deg = 68.0;   // composite, at MS
    double bs_subray_spread_deg = 8.0;   // within one path
    double ms_subray_spread_deg = 35.0;  // within one path
    double bs_sector_deg = 60.0;         // mean departure direction drawn in +/- this
    double bs_spacing_lambda = 10.0;
    double ms_spacing_lambda = 0.5;
    double velocity_mps = 60.0 / 3.6;
    double carrier_freq_hz = 5.0e9;

    double max_doppler_hz() const { return velocity_mps * carrier_freq_hz / kSpeedOfLight; }
    void validate() const;
};

struct SubRay {
    double amplitude = 0.0;
    double aod_rad = 0.0;
    double aoa_rad = 0.0;
    double phase_rad = 0.0;
    double doppler_hz = 0.0;
};

/// Frozen sub-ray parameters of one channel draw.
struct ChannelRealization {
    int nt = 0;
    int nr = 0;
    int num_subrays = 0;
    double bs_spacing_lambda = 0.0;
    double ms_spacing_lambda = 0.0;
    double max_doppler_hz = 0.0;
    double travel_direction_rad = 0.0;
    std::vector<double> tap_delays_s;
    std::vector<double> tap_powers;
    std::vector<SubRay> subrays;  // tap-major, num_subrays per tap

    const SubRay& subray(int tap, int m) const {
        return subrays[static_cast<std::size_t>(tap) * num_subrays + m];
    }
    int num_taps() const { return static_cast<int>(tap_delays_s.size()); }
};

/// Draws per-tap mean angles around a per-realization direction (Gaussian)
/// and Laplacian sub-ray offsets around them, uniform phases and a uniform
/// travel direction. Deterministic in `seed`.
ChannelRealization realize(const ChannelProfile& profile, const SpatialConfig& spatial, std::uint64_t seed);

/// Complex gain of every tap for each antenna pair at time t, laid out
/// [tap][t][r].
CVec tap_gains(const ChannelRealization& realization, double time_s);

/// h_{tr,k}(t) = sum_l sum_m a_lm exp(j(2 pi f_lm t + phi_lm)) a_t(aod) a_r(aoa) exp(-j 2 pi f_k tau_l)
ChannelMatrix frequency_response(const ChannelRealization& realization, double time_s,
                                 std::span<const double> subcarrier_freqs_hz);

/// Evaluates frequency responses of one realization at many instants,
/// caching the per-tap subcarrier phasors.
class FrequencyResponder {
public:
    FrequencyResponder(std::span<const double> tap_delays_s, std::span<const double> subcarrier_freqs_hz);

    ChannelMatrix evaluate(const ChannelRealization& realization, double time_s) const;
    void evaluate(const ChannelRealization& realization, double time_s, ChannelMatrix& out) const;
    int num_subcarriers() const { return num_subcarriers_; }

private:
    int num_taps_;
    int num_subcarriers_;
    CVec phasors_;  // [tap][k]
};

/// Channel sampled at OFDM symbol instants of one frame.
using ChannelTrace = std::vector<ChannelMatrix>;

/// y_{r,k,n} = sum_t h_{tr,k}(n) x_{t,k,n}
ResourceGrid apply_channel(const ResourceGrid& transmitted, const ChannelTrace& trace);

/// Adds circularly-symmetric complex Gaussian noise of variance n0 per sample.
void add_awgn(std::span<cplx> samples, double n0, Rng& rng);
void add_awgn(ResourceGrid& grid, double n0, std::uint64_t seed);

/// i.i.d. CN(0,1) gain per antenna pair, flat across all subcarriers.
ChannelMatrix flat_rayleigh(int nt, int nr, int nc, Rng& rng);

enum class ArraySide { kBs, kMs };
ArraySide parse_array_side(std::string_view name);

/// Magnitude of the complex correlation between elements 0 and 1 at the
/// given side, pooled over all taps of a realization (power weighted,
/// expectation over the sub-ray phases) and averaged over realizations.
double estimate_spatial_correlation(const ChannelProfile& profile, const SpatialConfig& spatial,
                                    double spacing_lambda, ArraySide side, int num_realizations,
                                    std::uint64_t seed = 1);

/// Mean composite RMS angle spread (degrees) of the drawn sub-rays at one side.
double mean_angle_spread_deg(const ChannelProfile& profile, const SpatialConfig& spatial, ArraySide side,
                             int num_realizations, std::uint64_t seed = 1);

/// |R(n * df)| for lags n = 0..max_lag, from frequency responses of every
/// antenna pair at t = 0 over `num_realizations` draws.
std::vector<double> estimate_frequency_correlation(const ChannelProfile& profile, const SpatialConfig& spatial,
                                                   std::span<const double> subcarrier_freqs_hz, int max_lag,
                                                   int num_realizations, std::uint64_t seed = 1);

/// Smallest frequency separation at which the correlation magnitude drops
/// to 0.5 (3 dB), linearly interpolated between lags spaced `spacing_hz`.
double coherence_bandwidth_hz(std::span<const double> correlation, double spacing_hz);

/// Re R(tau) / R(0) of the link (0,0) gain at f = 0, estimated from channel
/// samples over `num_realizations` draws for each lag.
std::vector<double> estimate_time_correlation(const ChannelProfile& profile, const SpatialConfig& spatial,
                                              std::span<const double> lags_s, int num_realizations,
                                              std::uint64_t seed = 1);

}  // namespace mccdma
