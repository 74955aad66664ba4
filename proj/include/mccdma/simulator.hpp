#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mccdma/config.hpp"

namespace mccdma {

struct ErrorStats {
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;  // any user in error
    std::uint64_t user_frames = 0;
    std::uint64_t user_frame_errors = 0;

    double ber() const { return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0; }
    double fer() const { return frames ? static_cast<double>(frame_errors) / static_cast<double>(frames) : 0.0; }
    double user_fer() const {
        return user_frames ? static_cast<double>(user_frame_errors) / static_cast<double>(user_frames) : 0.0;
    }
    void merge(const ErrorStats& other);
    bool operator==(const ErrorStats&) const = default;
};

/// N0 = 1 / (R m 10^(EbN0/10)) for unit symbol energy per subcarrier use.
/// +infinity gives 0.
double noise_variance_for(double ebn0_db, const SimConfig& config);

/// Per-cell Es/N0 seen by the receiver at noise variance n0: (Nu/Lc)/n0.
double genie_gamma(const SimConfig& config, double n0);

/// Optional measurement hook: accumulates per-cell energies of the noiseless
/// received signal and of the noise after OFDM demodulation.
struct FrameProbe {
    double signal_energy = 0.0;
    double noise_energy = 0.0;
    std::uint64_t cells = 0;
};

/// Runs complete frames for one configuration. Owns per-worker state (OFDM
/// plans, decoder scratch); not thread-safe.
class FrameSimulator {
public:
    explicit FrameSimulator(SimConfig config);
    ~FrameSimulator();
    FrameSimulator(FrameSimulator&&) noexcept;
    FrameSimulator& operator=(FrameSimulator&&) noexcept;

    const SimConfig& config() const;
    int blocks_per_frame() const;
    /// Channel bits per user per frame.
    int coded_bits_per_user() const;
    /// Information bits per user per frame.
    int info_bits_per_user() const;

    /// Deterministic in (config, frame_index); every random draw except the
    /// noise scale is independent of ebn0_db.
    ErrorStats run_frame(double ebn0_db, std::uint64_t frame_index, FrameProbe* probe = nullptr);

private:
    struct State;
    std::unique_ptr<State> state_;
};

ErrorStats run_frame(const SimConfig& config, double ebn0_db, std::uint64_t frame_index);

struct PointResult {
    double ebn0_db = 0.0;
    ErrorStats stats;
};

struct SweepOptions {
    int workers = 1;
    /// Called on the calling thread after each finished point.
    std::function<void(const PointResult&)> on_point;
};

/// Runs frames 0, 1, ... at one Eb/N0 until target_bit_errors or max_frames,
/// in index order, so the result does not depend on the worker count.
PointResult simulate_point(const SimConfig& config, double ebn0_db, int workers = 1);

std::vector<PointResult> sweep(const SimConfig& config, const SweepOptions& options = {});

inline constexpr std::string_view kCsvHeader =
    "ebn0_db,detector,chip_mapping,nt,nr,users,lc,modulation,coding,bits,bit_errors,ber,frames,frame_errors,fer,"
    "master_seed";

std::string csv_row(const SimConfig& config, const PointResult& point);
/// Header plus one row per point, newline terminated.
std::string report_csv(const SimConfig& config, const std::vector<PointResult>& points);
std::string report_summary(const SimConfig& config, const std::vector<PointResult>& points);
void write_csv(const std::filesystem::path& path, const SimConfig& config, const std::vector<PointResult>& points);

struct CsvRecord {
    double ebn0_db = 0.0;
    std::string detector;
    std::string chip_mapping;
    int nt = 0;
    int nr = 0;
    int users = 0;
    int lc = 0;
    std::string modulation;
    std::string coding;
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    double fer = 0.0;
    std::uint64_t master_seed = 0;
};

std::vector<CsvRecord> parse_csv(std::string_view text);

struct DerivedRates {
    double subcarrier_spacing_hz = 0.0;
    double symbol_duration_s = 0.0;
    double frame_duration_s = 0.0;
    double occupied_bandwidth_hz = 0.0;
    int blocks_per_frame = 0;
    int coded_bits_per_user = 0;
    int info_bits_per_user = 0;
    /// Information throughput of the configured system, all users.
    double throughput_bps = 0.0;
    /// Uncoded QPSK at full load with the configured OFDM and frame layout.
    double reference_qpsk_full_load_bps = 0.0;
    double max_doppler_hz = 0.0;
};

DerivedRates derived_rates(const SimConfig& config);
std::string format_info(const SimConfig& config);

}  // namespace mccdma
