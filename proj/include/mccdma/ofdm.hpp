#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mccdma/types.hpp"

namespace mccdma {

struct OfdmParams {
    int fft_size = 1024;
    int used_carriers = 736;
    int guard_samples = 216;
    double sampling_freq_hz = 57.6e6;

    double subcarrier_spacing_hz() const { return sampling_freq_hz / fft_size; }
    double useful_duration_s() const { return fft_size / sampling_freq_hz; }
    double guard_duration_s() const { return guard_samples / sampling_freq_hz; }
    double symbol_duration_s() const { return (fft_size + guard_samples) / sampling_freq_hz; }
    double occupied_bandwidth_hz() const { return used_carriers * subcarrier_spacing_hz(); }
    int samples_per_symbol() const { return fft_size + guard_samples; }

    void validate() const;
};

/// Signed FFT bins of the used subcarriers, ascending: -Nc/2..-1, +1..+Nc/2.
/// DC is never used.
std::vector<int> allocate_subcarriers(const OfdmParams& params);

/// Baseband frequency of each used subcarrier, in the order of
/// allocate_subcarriers.
std::vector<double> subcarrier_frequencies(const OfdmParams& params);

/// Cyclic-prefix OFDM modulator/demodulator with a unitary transform, so
/// time-domain energy of the useful part equals subcarrier energy.
///
/// Holds transform plans and scratch buffers: use one instance per thread.
class OfdmModem {
public:
    explicit OfdmModem(const OfdmParams& params);
    ~OfdmModem();
    OfdmModem(OfdmModem&&) noexcept;
    OfdmModem& operator=(OfdmModem&&) noexcept;
    OfdmModem(const OfdmModem&) = delete;
    OfdmModem& operator=(const OfdmModem&) = delete;

    const OfdmParams& params() const { return params_; }

    /// Nc subcarrier values -> Nfft + guard samples.
    CVec modulate(std::span<const cplx> column);
    void modulate(std::span<const cplx> column, std::span<cplx> samples);

    /// Nfft + guard samples -> Nc subcarrier values.
    CVec demodulate(std::span<const cplx> samples);
    void demodulate(std::span<const cplx> samples, std::span<cplx> column);

private:
    struct Plans;

    OfdmParams params_;
    std::vector<int> fft_index_;
    std::unique_ptr<Plans> plans_;
};

CVec modulate(std::span<const cplx> column, const OfdmParams& params);
CVec demodulate(std::span<const cplx> samples, const OfdmParams& params);

}  // namespace mccdma
