#include "mccdma/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace mccdma {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        s = s.substr(1, s.size() - 2);
    return std::string(s);
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
    T out{};
    const auto v = trim(value);
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc{} && ptr == v.data() + v.size(),
            "config key '" + std::string(key) + "': expected an integer, got '" + std::string(value) + "'");
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    const std::string v(trim(value));
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used == v.size() && !v.empty() && std::isfinite(out),
            "config key '" + std::string(key) + "': expected a number, got '" + v + "'");
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    const auto v = trim(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidParameter("config key '" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

// Shortest text that parses back to the same double.
std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

ChannelModel parse_channel_model(std::string_view name) {
    if (name == "geometric") return ChannelModel::kGeometric;
    if (name == "awgn") return ChannelModel::kAwgn;
    if (name == "flat_rayleigh") return ChannelModel::kFlatRayleigh;
    throw InvalidParameter("unknown channel model '" + std::string(name) +
                           "' (expected geometric, awgn or flat_rayleigh)");
}

std::string_view to_string(ChannelModel m) {
    switch (m) {
        case ChannelModel::kGeometric: return "geometric";
        case ChannelModel::kAwgn: return "awgn";
        case ChannelModel::kFlatRayleigh: return "flat_rayleigh";
    }
    return "?";
}

Coding parse_coding(std::string_view name) {
    if (name == "none") return Coding::kNone;
    if (name == "turbo_r12") return Coding::kTurboR12;
    throw InvalidParameter("unknown coding '" + std::string(name) + "' (expected none or turbo_r12)");
}

std::string_view to_string(Coding c) { return c == Coding::kNone ? "none" : "turbo_r12"; }

GammaMode parse_gamma_mode(std::string_view text) {
    text = trim(text);
    if (text == "genie") return {};
    constexpr std::string_view prefix = "fixed:";
    require(text.substr(0, prefix.size()) == prefix,
            "gamma_mode must be 'genie' or 'fixed:<value>', got '" + std::string(text) + "'");
    const double v = parse_real("gamma_mode", text.substr(prefix.size()));
    require(v > 0.0, "gamma_mode fixed value must be positive");
    return {false, v};
}

std::string to_string(const GammaMode& g) { return g.genie ? "genie" : "fixed:" + format_real(g.fixed_value); }

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    std::string_view rest = trim(text);
    if (!rest.empty() && rest.front() == '[' && rest.back() == ']') rest = trim(rest.substr(1, rest.size() - 2));
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        require(!item.empty(), "empty entry in number list '" + std::string(text) + "'");
        out.push_back(parse_real("list", item));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

int SimConfig::effective_spread_time() const {
    const bool two_d = chip_mapping == MappingScheme::k2Da || chip_mapping == MappingScheme::k2Db;
    return two_d ? spread_time : 1;
}

SpatialConfig SimConfig::spatial() const {
    SpatialConfig s;
    s.nt = nt;
    s.nr = nr;
    s.num_subrays = num_subrays;
    s.bs_angle_spread_deg = as_bs_deg;
    s.ms_angle_spread_deg = as_ms_deg;
    s.bs_subray_spread_deg = subray_spread_bs_deg;
    s.ms_subray_spread_deg = subray_spread_ms_deg;
    s.bs_spacing_lambda = bs_spacing_lambda;
    s.ms_spacing_lambda = ms_spacing_lambda;
    s.velocity_mps = velocity_kmh / 3.6;
    s.carrier_freq_hz = carrier_freq_hz;
    return s;
}

ChipMapping SimConfig::chip_layout() const {
    return ChipMapping(chip_mapping, lc, effective_spread_time(), ofdm.used_carriers, frame_symbols);
}

void SimConfig::validate() const {
    require(nt == 1 || nt == 2, "nt must be 1 or 2");
    require(nr == 1 || nr == 2, "nr must be 1 or 2");
    generate_walsh_hadamard(lc, num_users());  // validates Lc and Nu
    require(users >= 0, "users must be >= 0 (0 selects full load)");
    require(frame_symbols > 0 && frame_symbols % 2 == 0, "frame_symbols must be positive and even");
    ofdm.validate();
    spatial().validate();
    chip_layout();
    require(turbo_iterations >= 1, "turbo_iterations must be >= 1");
    require(max_frames >= 1, "max_frames must be >= 1");
    require(target_bit_errors >= 1, "target_bit_errors must be >= 1");
    if (!gamma_mode.genie) require(gamma_mode.fixed_value > 0.0, "fixed gamma must be positive");
}

void apply_setting(SimConfig& c, std::string_view key, std::string_view raw) {
    const std::string value = unquote(raw);
    using Setter = std::function<void(SimConfig&, const std::string&)>;
    static const std::map<std::string, Setter, std::less<>> setters = {
        {"chip_mapping", [](SimConfig& s, const std::string& v) { s.chip_mapping = parse_mapping_scheme(v); }},
        {"spread_time", [](SimConfig& s, const std::string& v) { s.spread_time = parse_integer<int>("spread_time", v); }},
        {"lc", [](SimConfig& s, const std::string& v) { s.lc = parse_integer<int>("lc", v); }},
        {"users", [](SimConfig& s, const std::string& v) { s.users = parse_integer<int>("users", v); }},
        {"detector", [](SimConfig& s, const std::string& v) { s.detector = parse_detector(v); }},
        {"gamma_mode", [](SimConfig& s, const std::string& v) { s.gamma_mode = parse_gamma_mode(v); }},
        {"fft_size", [](SimConfig& s, const std::string& v) { s.ofdm.fft_size = parse_integer<int>("fft_size", v); }},
        {"used_carriers",
         [](SimConfig& s, const std::string& v) { s.ofdm.used_carriers = parse_integer<int>("used_carriers", v); }},
        {"guard_samples",
         [](SimConfig& s, const std::string& v) { s.ofdm.guard_samples = parse_integer<int>("guard_samples", v); }},
        {"sampling_freq_hz",
         [](SimConfig& s, const std::string& v) { s.ofdm.sampling_freq_hz = parse_real("sampling_freq_hz", v); }},
        {"frame_symbols",
         [](SimConfig& s, const std::string& v) { s.frame_symbols = parse_integer<int>("frame_symbols", v); }},
        {"channel_model", [](SimConfig& s, const std::string& v) { s.channel_model = parse_channel_model(v); }},
        {"channel_profile", [](SimConfig& s, const std::string& v) { s.channel_profile = v; }},
        {"nt", [](SimConfig& s, const std::string& v) { s.nt = parse_integer<int>("nt", v); }},
        {"nr", [](SimConfig& s, const std::string& v) { s.nr = parse_integer<int>("nr", v); }},
        {"bs_spacing_lambda",
         [](SimConfig& s, const std::string& v) { s.bs_spacing_lambda = parse_real("bs_spacing_lambda", v); }},
        {"ms_spacing_lambda",
         [](SimConfig& s, const std::string& v) { s.ms_spacing_lambda = parse_real("ms_spacing_lambda", v); }},
        {"velocity_kmh", [](SimConfig& s, const std::string& v) { s.velocity_kmh = parse_real("velocity_kmh", v); }},
        {"carrier_freq_hz",
         [](SimConfig& s, const std::string& v) { s.carrier_freq_hz = parse_real("carrier_freq_hz", v); }},
        {"num_subrays", [](SimConfig& s, const std::string& v) { s.num_subrays = parse_integer<int>("num_subrays", v); }},
        {"as_bs_deg", [](SimConfig& s, const std::string& v) { s.as_bs_deg = parse_real("as_bs_deg", v); }},
        {"as_ms_deg", [](SimConfig& s, const std::string& v) { s.as_ms_deg = parse_real("as_ms_deg", v); }},
        {"subray_spread_bs_deg",
         [](SimConfig& s, const std::string& v) { s.subray_spread_bs_deg = parse_real("subray_spread_bs_deg", v); }},
        {"subray_spread_ms_deg",
         [](SimConfig& s, const std::string& v) { s.subray_spread_ms_deg = parse_real("subray_spread_ms_deg", v); }},
        {"modulation", [](SimConfig& s, const std::string& v) { s.modulation = parse_modulation(v); }},
        {"coding", [](SimConfig& s, const std::string& v) { s.coding = parse_coding(v); }},
        {"turbo_iterations",
         [](SimConfig& s, const std::string& v) { s.turbo_iterations = parse_integer<int>("turbo_iterations", v); }},
        {"log_map_correction",
         [](SimConfig& s, const std::string& v) { s.log_map_correction = parse_bool("log_map_correction", v); }},
        {"interleaver_seed",
         [](SimConfig& s, const std::string& v) { s.interleaver_seed = parse_integer<std::uint64_t>("interleaver_seed", v); }},
        {"ebn0_list", [](SimConfig& s, const std::string& v) { s.ebn0_list = parse_double_list(v); }},
        {"max_frames", [](SimConfig& s, const std::string& v) { s.max_frames = parse_integer<long>("max_frames", v); }},
        {"target_bit_errors",
         [](SimConfig& s, const std::string& v) { s.target_bit_errors = parse_integer<long>("target_bit_errors", v); }},
        {"master_seed",
         [](SimConfig& s, const std::string& v) { s.master_seed = parse_integer<std::uint64_t>("master_seed", v); }},
    };
    const auto it = setters.find(trim(key));
    require(it != setters.end(), "unknown config key '" + std::string(trim(key)) + "'");
    it->second(c, value);
}

SimConfig parse_config(std::string_view text, const std::string& source) {
    SimConfig config;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        auto sep = body.find('=');
        if (sep == std::string_view::npos) sep = body.find(':');
        require(sep != std::string_view::npos,
                source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        try {
            apply_setting(config, body.substr(0, sep), body.substr(sep + 1));
        } catch (const InvalidParameter& e) {
            throw InvalidParameter(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    SimConfig config = parse_config(buf.str(), path.string());
    // Relative profile paths are relative to the config file.
    if (config.channel_profile.rfind("builtin:", 0) != 0) {
        const std::filesystem::path profile(config.channel_profile);
        if (profile.is_relative()) config.channel_profile = (path.parent_path() / profile).lexically_normal().string();
    }
    return config;
}

std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& c) {
    std::string ebn0;
    for (std::size_t i = 0; i < c.ebn0_list.size(); ++i) ebn0 += (i ? "," : "") + format_real(c.ebn0_list[i]);
    return {
        {"chip_mapping", std::string(to_string(c.chip_mapping))},
        {"spread_time", std::to_string(c.spread_time)},
        {"lc", std::to_string(c.lc)},
        {"users", std::to_string(c.users)},
        {"detector", std::string(to_string(c.detector))},
        {"gamma_mode", to_string(c.gamma_mode)},
        {"fft_size", std::to_string(c.ofdm.fft_size)},
        {"used_carriers", std::to_string(c.ofdm.used_carriers)},
        {"guard_samples", std::to_string(c.ofdm.guard_samples)},
        {"sampling_freq_hz", format_real(c.ofdm.sampling_freq_hz)},
        {"frame_symbols", std::to_string(c.frame_symbols)},
        {"channel_model", std::string(to_string(c.channel_model))},
        {"channel_profile", c.channel_profile},
        {"nt", std::to_string(c.nt)},
        {"nr", std::to_string(c.nr)},
        {"bs_spacing_lambda", format_real(c.bs_spacing_lambda)},
        {"ms_spacing_lambda", format_real(c.ms_spacing_lambda)},
        {"velocity_kmh", format_real(c.velocity_kmh)},
        {"carrier_freq_hz", format_real(c.carrier_freq_hz)},
        {"num_subrays", std::to_string(c.num_subrays)},
        {"as_bs_deg", format_real(c.as_bs_deg)},
        {"as_ms_deg", format_real(c.as_ms_deg)},
        {"subray_spread_bs_deg", format_real(c.subray_spread_bs_deg)},
        {"subray_spread_ms_deg", format_real(c.subray_spread_ms_deg)},
        {"modulation", std::string(to_string(c.modulation))},
        {"coding", std::string(to_string(c.coding))},
        {"turbo_iterations", std::to_string(c.turbo_iterations)},
        {"log_map_correction", c.log_map_correction ? "true" : "false"},
        {"interleaver_seed", std::to_string(c.interleaver_seed)},
        {"ebn0_list", ebn0},
        {"max_frames", std::to_string(c.max_frames)},
        {"target_bit_errors", std::to_string(c.target_bit_errors)},
        {"master_seed", std::to_string(c.master_seed)},
    };
}

std::string render_config(const SimConfig& config) {
    std::string out;
    for (const auto& [key, value] : config_entries(config)) out += key + " = " + value + "\n";
    return out;
}

ChannelProfile resolve_profile(const SimConfig& config) {
    if (config.channel_profile == "builtin:bran_e") return bran_e_profile();
    return load_profile(config.channel_profile);
}

}  // namespace mccdma
