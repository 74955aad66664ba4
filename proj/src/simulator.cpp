#include "mccdma/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "mccdma/coding.hpp"
#include "mccdma/random.hpp"

namespace mccdma {

void ErrorStats::merge(const ErrorStats& o) {
    bits += o.bits;
    bit_errors += o.bit_errors;
    frames += o.frames;
    frame_errors += o.frame_errors;
    user_frames += o.user_frames;
    user_frame_errors += o.user_frame_errors;
}

double noise_variance_for(double ebn0_db, const SimConfig& config) {
    const double m = Constellation(config.modulation).bits_per_symbol();
    return 1.0 / (config.coding_rate() * m * std::pow(10.0, ebn0_db / 10.0));
}

double genie_gamma(const SimConfig& config, double n0) {
    const double load = static_cast<double>(config.num_users()) / config.lc;
    return n0 > 0.0 ? load / n0 : std::numeric_limits<double>::infinity();
}

namespace {

int pad_free_block_length(int coded_bits) {
    const int k = (coded_bits - kTurboTailBits) / 2;
    require(k >= 1, "frame too short for turbo coding: " + std::to_string(coded_bits) + " channel bits per user");
    return k;
}

// Uniform bits from raw generator output; independent of the standard
// library's distribution implementations.
void fill_bits(Rng& rng, std::span<std::uint8_t> out) {
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i % 64 == 0) word = rng();
        out[i] = static_cast<std::uint8_t>(word & 1U);
        word >>= 1;
    }
}

}  // namespace

struct FrameSimulator::State {
    SimConfig config;
    ChipMapping mapping;
    SpreadingMatrix codes;
    Constellation constellation;
    OfdmModem modem;
    std::optional<ChannelProfile> profile;
    std::optional<FrequencyResponder> responder;
    std::optional<TurboDecoder> decoder;
    SpatialConfig spatial;
    int users;
    int bits_per_symbol;
    int blocks;
    int coded_bits;  // per user per frame
    int block_length = 0;  // turbo K
    int codeword_length = 0;

    explicit State(SimConfig c)
        : config(std::move(c)),
          mapping(config.chip_layout()),
          codes(generate_walsh_hadamard(config.lc, config.num_users())),
          constellation(config.modulation),
          modem(config.ofdm),
          spatial(config.spatial()),
          users(config.num_users()),
          bits_per_symbol(constellation.bits_per_symbol()),
          blocks(mapping.blocks_per_frame()),
          coded_bits(blocks * bits_per_symbol) {
        if (config.channel_model == ChannelModel::kGeometric) {
            profile = resolve_profile(config);
            std::vector<double> delays;
            for (const auto& tap : profile->taps) delays.push_back(tap.delay_s);
            const auto freqs = subcarrier_frequencies(config.ofdm);
            responder.emplace(delays, freqs);
        }
        if (config.coding == Coding::kTurboR12) {
            block_length = pad_free_block_length(coded_bits);
            codeword_length = punctured_length(block_length);
            TurboConfig tc = make_turbo_config(block_length, config.interleaver_seed, config.turbo_iterations);
            tc.log_map_correction = config.log_map_correction;
            decoder.emplace(std::move(tc));
        }
    }

    int info_bits() const { return config.coding == Coding::kTurboR12 ? block_length : coded_bits; }

    // The channel multiplying each OFDM symbol (sampled at its centre) and
    // the channel the receiver equalizes each Alamouti pair with (sampled
    // at the pair midpoint). Both coincide for the static models.
    struct FrameChannel {
        ChannelTrace per_symbol;
        ChannelTrace per_pair;
    };

    FrameChannel channel_trace(std::uint64_t frame_index) const {
        const int nc = config.ofdm.used_carriers;
        const int pairs = config.frame_symbols / 2;
        FrameChannel ch;
        ch.per_symbol.reserve(config.frame_symbols);
        ch.per_pair.reserve(pairs);
        auto push_static = [&](const ChannelMatrix& h) {
            ch.per_pair.push_back(h);
            ch.per_symbol.push_back(h);
            ch.per_symbol.push_back(h);
        };
        switch (config.channel_model) {
            case ChannelModel::kAwgn: {
                ChannelMatrix h(config.nt, config.nr, nc);
                for (int t = 0; t < config.nt; ++t)
                    for (int r = 0; r < config.nr; ++r) std::ranges::fill(h.link(t, r), cplx{1.0, 0.0});
                for (int p = 0; p < pairs; ++p) push_static(h);
                break;
            }
            case ChannelModel::kFlatRayleigh: {
                Rng rng = make_stream(config.master_seed, frame_index, StreamTag::kChannel);
                for (int p = 0; p < pairs; ++p) push_static(flat_rayleigh(config.nt, config.nr, nc, rng));
                break;
            }
            case ChannelModel::kGeometric: {
                const auto realization = realize(
                    *profile, spatial, substream_seed(config.master_seed, frame_index, StreamTag::kChannel));
                const double ts = config.ofdm.symbol_duration_s();
                for (int n = 0; n < config.frame_symbols; ++n)
                    ch.per_symbol.push_back(responder->evaluate(realization, (n + 0.5) * ts));
                for (int p = 0; p < pairs; ++p) ch.per_pair.push_back(responder->evaluate(realization, (2 * p + 1) * ts));
                break;
            }
        }
        return ch;
    }
};

FrameSimulator::FrameSimulator(SimConfig config) {
    config.validate();
    state_ = std::make_unique<State>(std::move(config));
}
FrameSimulator::~FrameSimulator() = default;
FrameSimulator::FrameSimulator(FrameSimulator&&) noexcept = default;
FrameSimulator& FrameSimulator::operator=(FrameSimulator&&) noexcept = default;

const SimConfig& FrameSimulator::config() const { return state_->config; }
int FrameSimulator::blocks_per_frame() const { return state_->blocks; }
int FrameSimulator::coded_bits_per_user() const { return state_->coded_bits; }
int FrameSimulator::info_bits_per_user() const { return state_->info_bits(); }

ErrorStats FrameSimulator::run_frame(double ebn0_db, std::uint64_t frame_index, FrameProbe* probe) {
    State& s = *state_;
    const SimConfig& cfg = s.config;
    const int nu = s.users;
    const int lc = cfg.lc;
    const int m = s.bits_per_symbol;
    const int nc = cfg.ofdm.used_carriers;
    const int nsym = cfg.frame_symbols;
    const int pairs = nsym / 2;
    const bool coded = cfg.coding == Coding::kTurboR12;
    const double n0 = noise_variance_for(ebn0_db, cfg);
    const double gamma = cfg.gamma_mode.genie ? genie_gamma(cfg, n0) : cfg.gamma_mode.fixed_value;

    // Source bits and per-user channel bit streams.
    Rng data_rng = make_stream(cfg.master_seed, frame_index, StreamTag::kData);
    std::vector<Bits> info(nu, Bits(s.info_bits()));
    for (auto& b : info) fill_bits(data_rng, b);

    std::optional<ChannelInterleaver> interleaver;
    std::vector<Bits> channel_bits(nu);
    if (coded) {
        interleaver.emplace(s.codeword_length,
                            substream_seed(cfg.master_seed, frame_index, StreamTag::kInterleaver));
        const auto& tc = s.decoder->config();
        for (int u = 0; u < nu; ++u) {
            const Bits cw = turbo_encode(info[u], tc);
            channel_bits[u] = interleaver->interleave<std::uint8_t>(cw);
            channel_bits[u].resize(s.coded_bits, 0);
        }
    } else {
        channel_bits = info;
    }

    // Symbols -> spread blocks -> chip grid -> antennas.
    std::vector<CVec> user_symbols(nu);
    for (int u = 0; u < nu; ++u) user_symbols[u] = map_bits(channel_bits[u], s.constellation);
    CVec chips(static_cast<std::size_t>(s.blocks) * lc);
    CVec block_symbols(nu);
    for (int b = 0; b < s.blocks; ++b) {
        for (int u = 0; u < nu; ++u) block_symbols[u] = user_symbols[u][b];
        const CVec c = spread(block_symbols, s.codes);
        std::ranges::copy(c, chips.begin() + static_cast<std::ptrdiff_t>(b) * lc);
    }
    const ResourceGrid logical = map_chips(chips, s.mapping);
    const ResourceGrid transmitted = cfg.nt == 2 ? alamouti_encode_grid(logical) : logical;

    // Channel, OFDM and noise per receive antenna.
    const auto channel = s.channel_trace(frame_index);
    const ResourceGrid clean = apply_channel(transmitted, channel.per_symbol);
    ResourceGrid received(cfg.nr, nc, nsym);
    Rng noise_rng = make_stream(cfg.master_seed, frame_index, StreamTag::kNoise);
    CVec samples(cfg.ofdm.samples_per_symbol());
    for (int r = 0; r < cfg.nr; ++r) {
        for (int n = 0; n < nsym; ++n) {
            s.modem.modulate(clean.column(r, n), samples);
            if (n0 > 0.0) add_awgn(samples, n0, noise_rng);
            s.modem.demodulate(samples, received.column(r, n));
        }
    }
    if (probe) {
        for (int r = 0; r < cfg.nr; ++r) {
            for (int n = 0; n < nsym; ++n) {
                const auto x = clean.column(r, n);
                const auto y = received.column(r, n);
                for (int k = 0; k < nc; ++k) {
                    probe->signal_energy += std::norm(x[k]);
                    probe->noise_energy += std::norm(y[k] - x[k]);
                }
                probe->cells += static_cast<std::uint64_t>(nc);
            }
        }
    }

    // Equalize / combine per Alamouti pair with the effective channel.
    std::vector<EqualizerBank> banks;
    banks.reserve(pairs);
    ResourceGrid equalized(1, nc, nsym);
    for (int p = 0; p < pairs; ++p) {
        const ChannelMatrix& h = channel.per_pair[p];
        const ChannelMatrix effective = cfg.nt == 2 ? h.scaled(kAlamoutiScale) : h;
        banks.push_back(compute_equalizer(effective, cfg.detector, gamma));
        const EqualizerBank& bank = banks.back();
        if (cfg.nt == 2) {
            std::vector<SlotPair> rx(cfg.nr);
            for (int r = 0; r < cfg.nr; ++r) {
                const auto a = received.column(r, 2 * p);
                const auto b = received.column(r, 2 * p + 1);
                rx[r].first.assign(a.begin(), a.end());
                rx[r].second.assign(b.begin(), b.end());
            }
            const SlotPair z = combine(rx, bank);
            std::ranges::copy(z.first, equalized.column(0, 2 * p).begin());
            std::ranges::copy(z.second, equalized.column(0, 2 * p + 1).begin());
        } else {
            for (int half = 0; half < 2; ++half) {
                std::vector<CVec> rx(cfg.nr);
                for (int r = 0; r < cfg.nr; ++r) {
                    const auto col = received.column(r, 2 * p + half);
                    rx[r].assign(col.begin(), col.end());
                }
                const CVec z = equalize_single(rx, bank);
                std::ranges::copy(z, equalized.column(0, 2 * p + half).begin());
            }
        }
    }

    // Despread, normalize and demap.
    const CVec rx_chips = demap_chips(equalized, s.mapping, s.blocks);
    const double mai_fraction = lc > 1 ? static_cast<double>(nu - 1) / (lc - 1) : 0.0;
    std::vector<Bits> decided(nu);
    std::vector<std::vector<double>> llrs(nu);
    std::vector<double> gains(lc);
    for (int b = 0; b < s.blocks; ++b) {
        const auto cells = s.mapping.block_cells(b);
        double beta_sum = 0.0, beta_sq = 0.0, noise = 0.0;
        for (int c = 0; c < lc; ++c) {
            const EqualizerBank& bank = banks[cells[c].symbol / 2];
            const int k = cells[c].subcarrier;
            gains[c] = bank.total_gain(k);
            const double beta = bank.chip_gain(k);
            beta_sum += beta;
            beta_sq += beta * beta;
            noise += bank.noise_gain(k);
        }
        const double rho = rho_from_gains(gains, banks.front().inverse_gamma());
        const CVec est = despread_all(std::span<const cplx>(rx_chips).subspan(static_cast<std::size_t>(b) * lc, lc),
                                      s.codes);
        if (coded) {
            const double mean_beta = beta_sum / lc;
            const double mai = mai_fraction * std::max(0.0, beta_sq / lc - mean_beta * mean_beta);
            const double var = std::max(1e-12, rho * rho * (n0 * noise / lc + mai));
            for (int u = 0; u < nu; ++u) {
                const double r1[1] = {rho};
                const double v1[1] = {var};
                demap_soft(std::span<const cplx>(&est[u], 1), r1, v1, s.constellation, llrs[u]);
            }
        } else {
            const Bits hard = demap_hard(est, rho, s.constellation);
            for (int u = 0; u < nu; ++u)
                decided[u].insert(decided[u].end(), hard.begin() + u * m, hard.begin() + (u + 1) * m);
        }
    }

    if (coded) {
        for (int u = 0; u < nu; ++u) {
            llrs[u].resize(s.codeword_length);
            const auto soft = interleaver->deinterleave<double>(llrs[u]);
            decided[u] = s.decoder->decode(soft).bits;
        }
    }

    ErrorStats stats;
    stats.frames = 1;
    stats.user_frames = static_cast<std::uint64_t>(nu);
    for (int u = 0; u < nu; ++u) {
        std::uint64_t errors = 0;
        for (std::size_t i = 0; i < info[u].size(); ++i) errors += info[u][i] != decided[u][i];
        stats.bits += info[u].size();
        stats.bit_errors += errors;
        if (errors) ++stats.user_frame_errors;
    }
    stats.frame_errors = stats.user_frame_errors > 0 ? 1 : 0;
    return stats;
}

ErrorStats run_frame(const SimConfig& config, double ebn0_db, std::uint64_t frame_index) {
    FrameSimulator sim(config);
    return sim.run_frame(ebn0_db, frame_index);
}

namespace {

PointResult run_point(std::vector<std::unique_ptr<FrameSimulator>>& sims, double ebn0_db) {
    const SimConfig& cfg = sims.front()->config();
    const auto max_frames = static_cast<std::uint64_t>(cfg.max_frames);
    const auto target = static_cast<std::uint64_t>(cfg.target_bit_errors);
    const std::uint64_t window = 4 * sims.size();

    std::mutex mu;
    std::condition_variable cv;
    std::uint64_t next_index = 0;
    std::uint64_t consumed = 0;
    bool stop = false;
    std::map<std::uint64_t, ErrorStats> done;
    std::exception_ptr failure;

    auto worker = [&](FrameSimulator& sim) {
        for (;;) {
            std::uint64_t index = 0;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return stop || next_index >= max_frames || next_index < consumed + window; });
                if (stop || next_index >= max_frames) return;
                index = next_index++;
            }
            try {
                ErrorStats st = sim.run_frame(ebn0_db, index);
                std::lock_guard lock(mu);
                done.emplace(index, st);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> threads;
    for (auto& sim : sims) threads.emplace_back(worker, std::ref(*sim));

    PointResult result{ebn0_db, {}};
    {
        std::unique_lock lock(mu);
        while (!stop) {
            cv.wait(lock, [&] { return failure || done.contains(consumed); });
            if (failure) break;
            auto node = done.extract(consumed);
            result.stats.merge(node.mapped());
            ++consumed;
            if (result.stats.bit_errors >= target || consumed >= max_frames) stop = true;
            cv.notify_all();
        }
    }
    cv.notify_all();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    return result;
}

std::vector<std::unique_ptr<FrameSimulator>> make_workers(const SimConfig& config, int workers) {
    require(workers >= 1, "workers must be >= 1");
    std::vector<std::unique_ptr<FrameSimulator>> sims;
    for (int w = 0; w < workers; ++w) sims.push_back(std::make_unique<FrameSimulator>(config));
    return sims;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string format_scientific(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace

PointResult simulate_point(const SimConfig& config, double ebn0_db, int workers) {
    auto sims = make_workers(config, workers);
    return run_point(sims, ebn0_db);
}

std::vector<PointResult> sweep(const SimConfig& config, const SweepOptions& options) {
    require(!config.ebn0_list.empty(), "ebn0_list must not be empty");
    auto sims = make_workers(config, options.workers);
    std::vector<PointResult> out;
    for (double ebn0 : config.ebn0_list) {
        out.push_back(run_point(sims, ebn0));
        if (options.on_point) options.on_point(out.back());
    }
    return out;
}

std::string csv_row(const SimConfig& c, const PointResult& p) {
    std::ostringstream os;
    os << format_double(p.ebn0_db) << ',' << to_string(c.detector) << ',' << to_string(c.chip_mapping) << ','
       << c.nt << ',' << c.nr << ',' << c.num_users() << ',' << c.lc << ',' << to_string(c.modulation) << ','
       << to_string(c.coding) << ',' << p.stats.bits << ',' << p.stats.bit_errors << ','
       << format_double(p.stats.ber()) << ',' << p.stats.frames << ',' << p.stats.frame_errors << ','
       << format_double(p.stats.fer()) << ',' << c.master_seed;
    return os.str();
}

std::string report_csv(const SimConfig& config, const std::vector<PointResult>& points) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& p : points) out += csv_row(config, p) + '\n';
    return out;
}

std::string report_summary(const SimConfig& c, const std::vector<PointResult>& points) {
    std::ostringstream os;
    os << c.nt << "x" << c.nr << ' ' << to_string(c.detector) << ' ' << to_string(c.chip_mapping) << ", Lc=" << c.lc
       << ", users=" << c.num_users() << ", " << to_string(c.modulation) << ", coding=" << to_string(c.coding)
       << ", channel=" << to_string(c.channel_model) << ", seed=" << c.master_seed << '\n';
    for (const auto& p : points) {
        const auto& s = p.stats;
        os << "  Eb/N0 " << format_double(p.ebn0_db) << " dB: BER " << format_scientific(s.ber()) << " ("
           << s.bit_errors << '/' << s.bits << "), FER " << format_scientific(s.fer()) << " (" << s.frame_errors
           << '/' << s.frames << "), per-user FER " << format_scientific(s.user_fer()) << " ("
           << s.user_frame_errors << '/' << s.user_frames << ")\n";
    }
    return os.str();
}

void write_csv(const std::filesystem::path& path, const SimConfig& config, const std::vector<PointResult>& points) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "cannot open output file '" + path.string() + "'");
    out << report_csv(config, points);
    out.flush();
    require(static_cast<bool>(out), "failed writing output file '" + path.string() + "'");
}

namespace {

template <typename T>
T csv_number(std::string_view field, int line) {
    T v{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    require(ec == std::errc{} && ptr == field.data() + field.size(),
            "csv line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    return v;
}

}  // namespace

std::vector<CsvRecord> parse_csv(std::string_view text) {
    std::vector<CsvRecord> out;
    int line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            require(line == kCsvHeader, "csv: unexpected header '" + std::string(line) + "'");
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> f;
        for (std::size_t start = 0;;) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        require(f.size() == 16, "csv line " + std::to_string(line_no) + ": expected 16 fields");
        CsvRecord r;
        r.ebn0_db = csv_number<double>(f[0], line_no);
        r.detector = f[1];
        r.chip_mapping = f[2];
        r.nt = csv_number<int>(f[3], line_no);
        r.nr = csv_number<int>(f[4], line_no);
        r.users = csv_number<int>(f[5], line_no);
        r.lc = csv_number<int>(f[6], line_no);
        r.modulation = f[7];
        r.coding = f[8];
        r.bits = csv_number<std::uint64_t>(f[9], line_no);
        r.bit_errors = csv_number<std::uint64_t>(f[10], line_no);
        r.ber = csv_number<double>(f[11], line_no);
        r.frames = csv_number<std::uint64_t>(f[12], line_no);
        r.frame_errors = csv_number<std::uint64_t>(f[13], line_no);
        r.fer = csv_number<double>(f[14], line_no);
        r.master_seed = csv_number<std::uint64_t>(f[15], line_no);
        out.push_back(std::move(r));
    }
    require(header_seen, "csv: missing header");
    return out;
}

DerivedRates derived_rates(const SimConfig& config) {
    config.validate();
    DerivedRates d;
    d.subcarrier_spacing_hz = config.ofdm.subcarrier_spacing_hz();
    d.symbol_duration_s = config.ofdm.symbol_duration_s();
    d.frame_duration_s = config.frame_symbols * d.symbol_duration_s;
    d.occupied_bandwidth_hz = config.ofdm.occupied_bandwidth_hz();
    d.blocks_per_frame = config.chip_layout().blocks_per_frame();
    const int m = Constellation(config.modulation).bits_per_symbol();
    d.coded_bits_per_user = d.blocks_per_frame * m;
    d.info_bits_per_user = config.coding == Coding::kTurboR12 ? pad_free_block_length(d.coded_bits_per_user)
                                                              : d.coded_bits_per_user;
    d.throughput_bps = static_cast<double>(d.info_bits_per_user) * config.num_users() / d.frame_duration_s;

    SimConfig ref = config;
    ref.modulation = Modulation::kQpsk;
    ref.coding = Coding::kNone;
    ref.users = 0;
    const int ref_blocks = ref.chip_layout().blocks_per_frame();
    d.reference_qpsk_full_load_bps = static_cast<double>(ref_blocks) * 2 * ref.lc / d.frame_duration_s;
    d.max_doppler_hz = config.spatial().max_doppler_hz();
    return d;
}

std::string format_info(const SimConfig& config) {
    const DerivedRates d = derived_rates(config);
    char buf[2048];
    std::snprintf(buf, sizeof buf,
                  "subcarrier spacing        %.4f kHz\n"
                  "OFDM symbol duration      %.4f us (guard %.4f us)\n"
                  "frame duration            %.4f us (%d symbols)\n"
                  "occupied bandwidth        %.4f MHz (%d subcarriers)\n"
                  "spread blocks per frame   %d\n"
                  "channel bits/user/frame   %d\n"
                  "info bits/user/frame      %d\n"
                  "configured throughput     %.3f Mbit/s (%d users, %s, coding %s)\n"
                  "uncoded full-load QPSK    %.3f Mbit/s\n"
                  "max Doppler               %.3f Hz\n",
                  d.subcarrier_spacing_hz / 1e3, d.symbol_duration_s * 1e6, config.ofdm.guard_duration_s() * 1e6,
                  d.frame_duration_s * 1e6, config.frame_symbols, d.occupied_bandwidth_hz / 1e6,
                  config.ofdm.used_carriers, d.blocks_per_frame, d.coded_bits_per_user, d.info_bits_per_user,
                  d.throughput_bps / 1e6, config.num_users(), std::string(to_string(config.modulation)).c_str(),
                  std::string(to_string(config.coding)).c_str(), d.reference_qpsk_full_load_bps / 1e6,
                  d.max_doppler_hz);
    return buf;
}

}  // namespace mccdma
