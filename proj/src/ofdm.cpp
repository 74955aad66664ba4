#include "mccdma/ofdm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

namespace mccdma {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

void OfdmParams::validate() const {
    require(fft_size >= 2, "fft_size must be at least 2");
    require(used_carriers > 0 && used_carriers % 2 == 0, "used_carriers must be a positive even number");
    require(used_carriers <= fft_size,
            "used_carriers (" + std::to_string(used_carriers) + ") exceeds fft_size (" + std::to_string(fft_size) +
                ")");
    require(used_carriers <= fft_size - 2, "used_carriers must leave the DC and Nyquist bins free");
    require(guard_samples >= 0, "guard_samples must be non-negative");
    require(sampling_freq_hz > 0.0, "sampling frequency must be positive");
}

std::vector<int> allocate_subcarriers(const OfdmParams& params) {
    params.validate();
    const int half = params.used_carriers / 2;
    std::vector<int> bins;
    bins.reserve(params.used_carriers);
    for (int b = -half; b <= half; ++b)
        if (b != 0) bins.push_back(b);
    return bins;
}

std::vector<double> subcarrier_frequencies(const OfdmParams& params) {
    const auto bins = allocate_subcarriers(params);
    std::vector<double> f(bins.size());
    const double df = params.subcarrier_spacing_hz();
    std::transform(bins.begin(), bins.end(), f.begin(), [df](int b) { return b * df; });
    return f;
}

struct OfdmModem::Plans {
    fftw_complex* buffer = nullptr;
    fftw_plan inverse = nullptr;
    fftw_plan forward = nullptr;

    explicit Plans(int n) {
        std::lock_guard lock(planner_mutex());
        buffer = fftw_alloc_complex(static_cast<std::size_t>(n));
        inverse = fftw_plan_dft_1d(n, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
        forward = fftw_plan_dft_1d(n, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(inverse);
        fftw_destroy_plan(forward);
        fftw_free(buffer);
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;

    cplx* data() { return reinterpret_cast<cplx*>(buffer); }
};

OfdmModem::OfdmModem(const OfdmParams& params) : params_(params) {
    const auto bins = allocate_subcarriers(params_);
    fft_index_.resize(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) fft_index_[i] = (bins[i] + params_.fft_size) % params_.fft_size;
    plans_ = std::make_unique<Plans>(params_.fft_size);
}

OfdmModem::~OfdmModem() = default;
OfdmModem::OfdmModem(OfdmModem&&) noexcept = default;
OfdmModem& OfdmModem::operator=(OfdmModem&&) noexcept = default;

void OfdmModem::modulate(std::span<const cplx> column, std::span<cplx> samples) {
    const int n = params_.fft_size;
    const int guard = params_.guard_samples;
    require(static_cast<int>(column.size()) == params_.used_carriers,
            "modulate: expected " + std::to_string(params_.used_carriers) + " subcarriers, got " +
                std::to_string(column.size()));
    require(static_cast<int>(samples.size()) == n + guard, "modulate: output length mismatch");
    cplx* buf = plans_->data();
    std::fill(buf, buf + n, cplx{});
    for (std::size_t i = 0; i < column.size(); ++i) buf[fft_index_[i]] = column[i];
    fftw_execute(plans_->inverse);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) samples[guard + i] = buf[i] * scale;
    for (int i = 0; i < guard; ++i) samples[i] = samples[n + i];
}

CVec OfdmModem::modulate(std::span<const cplx> column) {
    CVec samples(params_.samples_per_symbol());
    modulate(column, samples);
    return samples;
}

void OfdmModem::demodulate(std::span<const cplx> samples, std::span<cplx> column) {
    const int n = params_.fft_size;
    const int guard = params_.guard_samples;
    require(static_cast<int>(samples.size()) == n + guard,
            "demodulate: expected " + std::to_string(n + guard) + " samples, got " + std::to_string(samples.size()));
    require(static_cast<int>(column.size()) == params_.used_carriers, "demodulate: output length mismatch");
    cplx* buf = plans_->data();
    std::copy(samples.begin() + guard, samples.end(), buf);
    fftw_execute(plans_->forward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < column.size(); ++i) column[i] = buf[fft_index_[i]] * scale;
}

CVec OfdmModem::demodulate(std::span<const cplx> samples) {
    CVec column(params_.used_carriers);
    demodulate(samples, column);
    return column;
}

CVec modulate(std::span<const cplx> column, const OfdmParams& params) {
    OfdmModem modem(params);
    return modem.modulate(column);
}

CVec demodulate(std::span<const cplx> samples, const OfdmParams& params) {
    OfdmModem modem(params);
    return modem.demodulate(samples);
}

}  // namespace mccdma
