#include "mccdma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mccdma {

namespace {

constexpr double kDegToRad = kPi / 180.0;

constexpr std::string_view kBranE = R"(# ETSI BRAN channel E, first two taps merged
4.885   -1.989
20      -5.2
40      -0.8
70      -1.3
100     -1.9
140     -0.3
190     -1.2
240     -2.1
320      0.0
430     -1.9
560     -2.8
710     -5.4
880     -7.3
1070    -10.6
1280    -13.4
1510    -17.4
1760    -20.9
)";

double laplacian(Rng& rng, double std_dev) {
    if (std_dev <= 0.0) return 0.0;
    std::exponential_distribution<double> expo(1.0);
    std::bernoulli_distribution sign(0.5);
    const double magnitude = expo(rng) * std_dev / std::sqrt(2.0);
    return sign(rng) ? magnitude : -magnitude;
}

double path_spread_deg(double composite, double subray) {
    return composite > subray ? std::sqrt(composite * composite - subray * subray) : 0.0;
}

}  // namespace

double ChannelProfile::mean_delay_s() const {
    double m = 0.0;
    for (const auto& t : taps) m += t.power * t.delay_s;
    return m;
}

double ChannelProfile::rms_delay_spread_s() const {
    const double m = mean_delay_s();
    double v = 0.0;
    for (const auto& t : taps) v += t.power * (t.delay_s - m) * (t.delay_s - m);
    return std::sqrt(std::max(v, 0.0));
}

ChannelProfile parse_profile(std::string_view text, std::string source) {
    ChannelProfile profile;
    profile.source = std::move(source);
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    double total = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        double delay_ns = 0.0, power_db = 0.0;
        if (!(fields >> delay_ns)) {
            require(line.find_first_not_of(" \t\r") == std::string::npos,
                    profile.source + ":" + std::to_string(line_no) + ": cannot parse tap delay");
            continue;
        }
        require(static_cast<bool>(fields >> power_db),
                profile.source + ":" + std::to_string(line_no) + ": missing tap power");
        std::string rest;
        require(!(fields >> rest), profile.source + ":" + std::to_string(line_no) + ": trailing text '" + rest + "'");
        require(std::isfinite(delay_ns) && delay_ns >= 0.0,
                profile.source + ":" + std::to_string(line_no) + ": tap delay must be finite and >= 0");
        require(std::isfinite(power_db), profile.source + ":" + std::to_string(line_no) + ": tap power not finite");
        if (!profile.taps.empty())
            require(delay_ns * 1e-9 >= profile.taps.back().delay_s,
                    profile.source + ":" + std::to_string(line_no) + ": tap delays must be non-decreasing");
        const double p = std::pow(10.0, power_db / 10.0);
        profile.taps.push_back({delay_ns * 1e-9, p});
        total += p;
    }
    require(!profile.taps.empty(), profile.source + ": profile has no taps");
    require(std::isfinite(total) && total > 0.0, profile.source + ": tap powers cannot be normalized");
    for (auto& t : profile.taps) t.power /= total;
    return profile;
}

ChannelProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open channel profile '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_profile(buf.str(), path.string());
}

ChannelProfile bran_e_profile() { return parse_profile(kBranE, "builtin:bran_e"); }

void SpatialConfig::validate() const {
    require(nt >= 1 && nr >= 1, "antenna counts must be positive");
    require(num_subrays >= 1, "number of sub-rays must be >= 1");
    require(bs_angle_spread_deg >= 0 && ms_angle_spread_deg >= 0, "angle spreads must be non-negative");
    require(bs_subray_spread_deg >= 0 && ms_subray_spread_deg >= 0, "sub-ray spreads must be non-negative");
    require(bs_spacing_lambda >= 0 && ms_spacing_lambda >= 0, "antenna spacings must be non-negative");
    require(velocity_mps >= 0 && carrier_freq_hz > 0, "invalid velocity or carrier frequency");
}

ChannelRealization realize(const ChannelProfile& profile, const SpatialConfig& spatial, std::uint64_t seed) {
    spatial.validate();
    require(!profile.taps.empty(), "realize: empty channel profile");
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ChannelRealization real;
    real.nt = spatial.nt;
    real.nr = spatial.nr;
    real.num_subrays = spatial.num_subrays;
    real.bs_spacing_lambda = spatial.bs_spacing_lambda;
    real.ms_spacing_lambda = spatial.ms_spacing_lambda;
    real.max_doppler_hz = spatial.max_doppler_hz();
    real.travel_direction_rad = 2.0 * kPi * unit(rng);

    const double bs_center = (2.0 * unit(rng) - 1.0) * spatial.bs_sector_deg * kDegToRad;
    const double ms_center = (2.0 * unit(rng) - 1.0) * kPi;
    const double bs_path = path_spread_deg(spatial.bs_angle_spread_deg, spatial.bs_subray_spread_deg) * kDegToRad;
    const double ms_path = path_spread_deg(spatial.ms_angle_spread_deg, spatial.ms_subray_spread_deg) * kDegToRad;
    const double bs_sub = spatial.bs_subray_spread_deg * kDegToRad;
    const double ms_sub = spatial.ms_subray_spread_deg * kDegToRad;

    const int m_count = spatial.num_subrays;
    real.subrays.reserve(profile.taps.size() * m_count);
    for (const auto& tap : profile.taps) {
        real.tap_delays_s.push_back(tap.delay_s);
        real.tap_powers.push_back(tap.power);
        const double aod_mean = bs_center + bs_path * gauss(rng);
        const double aoa_mean = ms_center + ms_path * gauss(rng);
        const double amplitude = std::sqrt(tap.power / m_count);
        for (int m = 0; m < m_count; ++m) {
            SubRay ray;
            ray.amplitude = amplitude;
            ray.aod_rad = aod_mean + laplacian(rng, bs_sub);
            ray.aoa_rad = aoa_mean + laplacian(rng, ms_sub);
            ray.phase_rad = 2.0 * kPi * unit(rng);
            ray.doppler_hz = real.max_doppler_hz * std::cos(ray.aoa_rad - real.travel_direction_rad);
            real.subrays.push_back(ray);
        }
    }
    return real;
}

CVec tap_gains(const ChannelRealization& real, double time_s) {
    const int nt = real.nt, nr = real.nr, nl = real.num_taps();
    CVec gains(static_cast<std::size_t>(nl) * nt * nr);
    for (int l = 0; l < nl; ++l) {
        for (int m = 0; m < real.num_subrays; ++m) {
            const SubRay& ray = real.subray(l, m);
            const cplx base = std::polar(ray.amplitude, 2.0 * kPi * ray.doppler_hz * time_s + ray.phase_rad);
            const cplx tx_step = std::polar(1.0, 2.0 * kPi * real.bs_spacing_lambda * std::sin(ray.aod_rad));
            const cplx rx_step = std::polar(1.0, 2.0 * kPi * real.ms_spacing_lambda * std::sin(ray.aoa_rad));
            cplx tx = base;
            for (int t = 0; t < nt; ++t) {
                cplx v = tx;
                for (int r = 0; r < nr; ++r) {
                    gains[(static_cast<std::size_t>(l) * nt + t) * nr + r] += v;
                    v *= rx_step;
                }
                tx *= tx_step;
            }
        }
    }
    return gains;
}

FrequencyResponder::FrequencyResponder(std::span<const double> tap_delays_s, std::span<const double> freqs)
    : num_taps_(static_cast<int>(tap_delays_s.size())), num_subcarriers_(static_cast<int>(freqs.size())),
      phasors_(tap_delays_s.size() * freqs.size()) {
    for (int l = 0; l < num_taps_; ++l)
        for (int k = 0; k < num_subcarriers_; ++k)
            phasors_[static_cast<std::size_t>(l) * num_subcarriers_ + k] =
                std::polar(1.0, -2.0 * kPi * freqs[k] * tap_delays_s[l]);
}

void FrequencyResponder::evaluate(const ChannelRealization& real, double time_s, ChannelMatrix& out) const {
    require(real.num_taps() == num_taps_, "frequency responder built for a different tap count");
    if (out.nt() != real.nt || out.nr() != real.nr || out.nc() != num_subcarriers_)
        out = ChannelMatrix(real.nt, real.nr, num_subcarriers_);
    const CVec gains = tap_gains(real, time_s);
    for (int t = 0; t < real.nt; ++t) {
        for (int r = 0; r < real.nr; ++r) {
            auto h = out.link(t, r);
            std::fill(h.begin(), h.end(), cplx{});
            for (int l = 0; l < num_taps_; ++l) {
                const cplx g = gains[(static_cast<std::size_t>(l) * real.nt + t) * real.nr + r];
                const cplx* e = &phasors_[static_cast<std::size_t>(l) * num_subcarriers_];
                for (int k = 0; k < num_subcarriers_; ++k) h[k] += g * e[k];
            }
        }
    }
}

ChannelMatrix FrequencyResponder::evaluate(const ChannelRealization& real, double time_s) const {
    ChannelMatrix out(real.nt, real.nr, num_subcarriers_);
    evaluate(real, time_s, out);
    return out;
}

ChannelMatrix frequency_response(const ChannelRealization& real, double time_s,
                                 std::span<const double> subcarrier_freqs_hz) {
    return FrequencyResponder(real.tap_delays_s, subcarrier_freqs_hz).evaluate(real, time_s);
}

ResourceGrid apply_channel(const ResourceGrid& tx, const ChannelTrace& trace) {
    require(static_cast<int>(trace.size()) == tx.symbols(),
            "apply_channel: trace has " + std::to_string(trace.size()) + " symbols, grid has " +
                std::to_string(tx.symbols()));
    require(!trace.empty(), "apply_channel: empty trace");
    const int nr = trace.front().nr();
    ResourceGrid rx(nr, tx.subcarriers(), tx.symbols());
    for (int n = 0; n < tx.symbols(); ++n) {
        const ChannelMatrix& h = trace[n];
        require(h.nt() == tx.antennas() && h.nr() == nr && h.nc() == tx.subcarriers(),
                "apply_channel: channel dimensions do not match the grid");
        for (int r = 0; r < nr; ++r) {
            auto y = rx.column(r, n);
            for (int t = 0; t < tx.antennas(); ++t) {
                const auto x = tx.column(t, n);
                const auto link = h.link(t, r);
                for (int k = 0; k < tx.subcarriers(); ++k) y[k] += link[k] * x[k];
            }
        }
    }
    return rx;
}

void add_awgn(std::span<cplx> samples, double n0, Rng& rng) {
    require(n0 >= 0.0, "add_awgn: noise variance must be non-negative");
    if (n0 == 0.0) return;
    std::normal_distribution<double> gauss(0.0, std::sqrt(n0 / 2.0));
    for (auto& s : samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += cplx(re, im);
    }
}

void add_awgn(ResourceGrid& grid, double n0, std::uint64_t seed) {
    Rng rng(seed);
    add_awgn(grid.cells(), n0, rng);
}

ChannelMatrix flat_rayleigh(int nt, int nr, int nc, Rng& rng) {
    ChannelMatrix h(nt, nr, nc);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    for (int t = 0; t < nt; ++t) {
        for (int r = 0; r < nr; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            const cplx g(re, im);
            auto link = h.link(t, r);
            std::fill(link.begin(), link.end(), g);
        }
    }
    return h;
}

ArraySide parse_array_side(std::string_view name) {
    if (name == "bs") return ArraySide::kBs;
    if (name == "ms") return ArraySide::kMs;
    throw InvalidParameter("unknown array side '" + std::string(name) + "' (expected bs or ms)");
}

double estimate_spatial_correlation(const ChannelProfile& profile, const SpatialConfig& spatial,
                                    double spacing_lambda, ArraySide side, int num_realizations,
                                    std::uint64_t seed) {
    require(num_realizations >= 1, "need at least one realization");
    require(spacing_lambda >= 0.0, "spacing must be non-negative");
    double acc = 0.0;
    for (int i = 0; i < num_realizations; ++i) {
        const auto real = realize(profile, spatial, substream_seed(seed, static_cast<std::uint64_t>(i),
                                                                   StreamTag::kChannel));
        cplx corr{};
        double power = 0.0;
        for (const auto& ray : real.subrays) {
            const double angle = side == ArraySide::kBs ? ray.aod_rad : ray.aoa_rad;
            const double w = ray.amplitude * ray.amplitude;
            corr += w * std::polar(1.0, -2.0 * kPi * spacing_lambda * std::sin(angle));
            power += w;
        }
        acc += std::abs(corr) / power;
    }
    return acc / num_realizations;
}

double mean_angle_spread_deg(const ChannelProfile& profile, const SpatialConfig& spatial, ArraySide side,
                             int num_realizations, std::uint64_t seed) {
    require(num_realizations >= 1, "need at least one realization");
    double acc = 0.0;
    for (int i = 0; i < num_realizations; ++i) {
        const auto real = realize(profile, spatial, substream_seed(seed, static_cast<std::uint64_t>(i),
                                                                   StreamTag::kChannel));
        double w_sum = 0.0, mean = 0.0, sq = 0.0;
        for (const auto& ray : real.subrays) {
            const double a = side == ArraySide::kBs ? ray.aod_rad : ray.aoa_rad;
            const double w = ray.amplitude * ray.amplitude;
            w_sum += w;
            mean += w * a;
            sq += w * a * a;
        }
        mean /= w_sum;
        acc += std::sqrt(std::max(sq / w_sum - mean * mean, 0.0));
    }
    return acc / num_realizations / kDegToRad;
}

std::vector<double> estimate_frequency_correlation(const ChannelProfile& profile, const SpatialConfig& spatial,
                                                   std::span<const double> freqs, int max_lag,
                                                   int num_realizations, std::uint64_t seed) {
    const int nc = static_cast<int>(freqs.size());
    require(max_lag >= 0 && max_lag < nc, "max_lag must be smaller than the number of subcarriers");
    require(num_realizations >= 1, "need at least one realization");
    std::vector<cplx> cross(max_lag + 1);
    std::vector<double> energy_a(max_lag + 1), energy_b(max_lag + 1);
    std::vector<double> delays;
    for (const auto& t : profile.taps) delays.push_back(t.delay_s);
    const FrequencyResponder responder(delays, freqs);
    for (int i = 0; i < num_realizations; ++i) {
        const auto real = realize(profile, spatial, substream_seed(seed, static_cast<std::uint64_t>(i),
                                                                   StreamTag::kChannel));
        const ChannelMatrix h = responder.evaluate(real, 0.0);
        for (int t = 0; t < h.nt(); ++t) {
            for (int r = 0; r < h.nr(); ++r) {
                const auto link = h.link(t, r);
                for (int lag = 0; lag <= max_lag; ++lag) {
                    for (int k = 0; k + lag < nc; ++k) {
                        cross[lag] += link[k] * std::conj(link[k + lag]);
                        energy_a[lag] += std::norm(link[k]);
                        energy_b[lag] += std::norm(link[k + lag]);
                    }
                }
            }
        }
    }
    std::vector<double> out(max_lag + 1);
    for (int lag = 0; lag <= max_lag; ++lag)
        out[lag] = std::abs(cross[lag]) / std::sqrt(energy_a[lag] * energy_b[lag]);
    return out;
}

double coherence_bandwidth_hz(std::span<const double> correlation, double spacing_hz) {
    require(!correlation.empty(), "empty correlation");
    for (std::size_t i = 1; i < correlation.size(); ++i) {
        if (correlation[i] <= 0.5) {
            const double a = correlation[i - 1], b = correlation[i];
            const double frac = a == b ? 0.0 : (a - 0.5) / (a - b);
            return (static_cast<double>(i - 1) + frac) * spacing_hz;
        }
    }
    return static_cast<double>(correlation.size() - 1) * spacing_hz;
}

std::vector<double> estimate_time_correlation(const ChannelProfile& profile, const SpatialConfig& spatial,
                                              std::span<const double> lags_s, int num_realizations,
                                              std::uint64_t seed) {
    require(num_realizations >= 1, "need at least one realization");
    std::vector<cplx> acc(lags_s.size());
    double power = 0.0;
    for (int i = 0; i < num_realizations; ++i) {
        const auto real = realize(profile, spatial, substream_seed(seed, static_cast<std::uint64_t>(i),
                                                                   StreamTag::kChannel));
        const auto link0 = [&](double t) {
            const CVec g = tap_gains(real, t);
            cplx sum{};
            for (int l = 0; l < real.num_taps(); ++l) sum += g[static_cast<std::size_t>(l) * real.nt * real.nr];
            return sum;
        };
        const cplx h0 = link0(0.0);
        power += std::norm(h0);
        for (std::size_t j = 0; j < lags_s.size(); ++j) acc[j] += link0(lags_s[j]) * std::conj(h0);
    }
    std::vector<double> out(lags_s.size());
    for (std::size_t j = 0; j < lags_s.size(); ++j) out[j] = acc[j].real() / power;
    return out;
}

}  // namespace mccdma
