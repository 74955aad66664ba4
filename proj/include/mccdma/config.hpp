#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mccdma/channel.hpp"
#include "mccdma/modem.hpp"
#include "mccdma/ofdm.hpp"
#include "mccdma/spreading.hpp"
#include "mccdma/stbc.hpp"

namespace mccdma {

enum class ChannelModel { kGeometric, kAwgn, kFlatRayleigh };
enum class Coding { kNone, kTurboR12 };

ChannelModel parse_channel_model(std::string_view name);
std::string_view to_string(ChannelModel m);
Coding parse_coding(std::string_view name);
std::string_view to_string(Coding c);

/// Receiver's SNR estimate for MMSE: the true per-cell Es/N0 (genie) or a
/// fixed value.
struct GammaMode {
    bool genie = true;
    double fixed_value = 0.0;
};

GammaMode parse_gamma_mode(std::string_view text);
std::string to_string(const GammaMode& g);

/// Every simulation parameter. Defaults follow the outdoor system
/// configuration (57.6 MHz sampling, 736 of 1024 subcarriers, 30-symbol
/// frames, BRAN E at 5 GHz and 60 km/h).
struct SimConfig {
    // spreading
    MappingScheme chip_mapping = MappingScheme::k1Db;
    int spread_time = 2;  // St for 2D schemes; 1D schemes always use 1
    int lc = 32;
    int users = 0;  // 0 means full load (Lc)

    // stbc / detection
    Detector detector = Detector::kMmse;
    GammaMode gamma_mode{};

    // ofdm
    OfdmParams ofdm{};
    int frame_symbols = 30;

    // channel
    ChannelModel channel_model = ChannelModel::kGeometric;
    std::string channel_profile = "builtin:bran_e";
    int nt = 2;
    int nr = 2;
    double bs_spacing_lambda = 10.0;
    double ms_spacing_lambda = 0.5;
    double velocity_kmh = 60.0;
    double carrier_freq_hz = 5.0e9;
    int num_subrays = 20;
    double as_bs_deg = 21.4;
    double as_ms_deg = 68.0;
    double subray_spread_bs_deg = 8.0;
    double subray_spread_ms_deg = 35.0;

    // coding / modulation
    Modulation modulation = Modulation::kQpsk;
    Coding coding = Coding::kNone;
    int turbo_iterations = 6;
    bool log_map_correction = false;
    std::uint64_t interleaver_seed = 1;

    // sweep
    std::vector<double> ebn0_list{0, 2, 4, 6, 8, 10};
    long max_frames = 20000;
    long target_bit_errors = 1000;
    std::uint64_t master_seed = 1;

    int num_users() const { return users > 0 ? users : lc; }
    int effective_spread_time() const;
    double coding_rate() const { return coding == Coding::kTurboR12 ? 0.5 : 1.0; }
    bool stbc() const { return nt == 2; }
    SpatialConfig spatial() const;
    ChipMapping chip_layout() const;

    void validate() const;
};

/// Applies one `key = value` setting. Unknown keys are an error.
void apply_setting(SimConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines; `#` starts a comment.
SimConfig parse_config(std::string_view text, const std::string& source = "<memory>");
SimConfig load_config(const std::filesystem::path& path);

/// All keys with their current values, in a stable order. parse_config of
/// the rendered text reproduces the configuration.
std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& config);
std::string render_config(const SimConfig& config);

std::vector<double> parse_double_list(std::string_view text);

/// Resolves `channel_profile` ("builtin:bran_e" or a file path).
ChannelProfile resolve_profile(const SimConfig& config);

}  // namespace mccdma
