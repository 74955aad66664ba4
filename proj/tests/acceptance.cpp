// Acceptance gate. Runs every criterion at its pinned tolerance and prints
// one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mccdma/channel.hpp"
#include "mccdma/coding.hpp"
#include "mccdma/config.hpp"
#include "mccdma/simulator.hpp"
#include "oracles.hpp"

using namespace mccdma;

namespace {

// Pinned tolerances.
constexpr double kAwgnSigmas = 3.0;
constexpr std::uint64_t kAwgnMinBits = 10'000'000;
constexpr double kDiversityRelTol = 0.10;
constexpr double kDiversityEbN0 = 14.0;  // oracle BER 1.1e-3
constexpr int kNoiselessFrames = 10;
constexpr double kBsCorrTarget = 0.7, kMsCorrTarget = 0.35, kCorrTol = 0.15;
constexpr double kFarCorrLimit = 0.1 + 0.05;
constexpr double kRmsLo = 0.2e-6, kRmsHi = 0.3e-6;
constexpr double kCoherenceTarget = 1.5e6, kCoherenceTol = 0.5e6;
constexpr double kDopplerTarget = 277.8, kDopplerTol = 0.1;
constexpr int kChannelRealizations = 32;
constexpr double kOrderingEbN0 = 8.0;
constexpr long kOrderingErrors = 300;
constexpr double kLoadEbN0 = 4.0;
constexpr int kLoadFrames = 400;
constexpr int kTurboNoiselessBlocks = 100;
constexpr double kMlAgreement = 0.95;
constexpr double kCodingGainDb = 2.0;
constexpr double kCodingTargetBer = 1e-4;
constexpr double kThroughputLo = 66e6, kThroughputHi = 69e6;

constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1. SISO over the unit channel against the Gray QPSK closed form.
Outcome awgn_anchor() {
    SimConfig c;
    c.channel_model = ChannelModel::kAwgn;
    c.nt = 1;
    c.nr = 1;
    c.detector = Detector::kMmse;
    FrameSimulator sim(c);
    const auto frames = static_cast<std::uint64_t>((kAwgnMinBits + sim.info_bits_per_user() * 32 - 1) /
                                                   (sim.info_bits_per_user() * 32));
    bool pass = true;
    std::string detail;
    for (double ebn0 : {4.0, 6.0, 8.0}) {
        ErrorStats s;
        for (std::uint64_t f = 0; f < frames; ++f) s.merge(sim.run_frame(ebn0, f));
        const double p = oracle::qpsk_awgn_ber(ebn0);
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(s.bits));
        const double z = (s.ber() - p) / se;
        pass &= s.bits >= kAwgnMinBits && std::abs(z) <= kAwgnSigmas;
        detail += fmt("%g dB: %.4e vs %.4e (z=%+.2f)  ", ebn0, s.ber(), p, z);
    }
    return {pass, detail};
}

// 2. Alamouti 2x1 ZF over flat Rayleigh against half-power two-branch MRC.
Outcome diversity_anchor() {
    SimConfig c;
    c.channel_model = ChannelModel::kFlatRayleigh;
    c.nt = 2;
    c.nr = 1;
    c.detector = Detector::kZf;
    c.ofdm.fft_size = 64;
    c.ofdm.used_carriers = 32;
    c.ofdm.guard_samples = 16;
    c.lc = 32;
    c.validate();
    FrameSimulator sim(c);
    const int frames = 40000;
    ErrorStats s;
    std::vector<double> batch;
    ErrorStats current;
    for (int f = 0; f < frames; ++f) {
        current.merge(sim.run_frame(kDiversityEbN0, static_cast<std::uint64_t>(f)));
        if ((f + 1) % 400 == 0) {
            batch.push_back(current.ber());
            s.merge(current);
            current = {};
        }
    }
    const double oracle_ber = oracle::mrc2_half_power_ber(kDiversityEbN0);
    const auto ci = oracle::mean_interval(batch);
    const double rel = s.ber() / oracle_ber - 1.0;
    return {std::abs(rel) <= kDiversityRelTol,
            fmt("%g dB: %.4e vs oracle %.4e (rel %+.2f%%, batch CI +-%.2f%%, closed form %.4e)", kDiversityEbN0,
                s.ber(), oracle_ber, 100.0 * rel, 100.0 * ci.half_width / oracle_ber,
                oracle::mrc2_half_power_ber_closed(kDiversityEbN0))};
}

// 3. Zero errors without noise over the whole option matrix.
Outcome noiseless_matrix() {
    int combos = 0, failures = 0;
    std::string first;
    for (auto map : {MappingScheme::k1Da, MappingScheme::k1Db, MappingScheme::k2Da, MappingScheme::k2Db}) {
        for (auto det : {Detector::kZf, Detector::kMmse}) {
            for (int nr : {1, 2}) {
                for (auto mod : {Modulation::kQpsk, Modulation::kQam16}) {
                    for (auto coding : {Coding::kNone, Coding::kTurboR12}) {
                        SimConfig c;
                        c.chip_mapping = map;
                        c.detector = det;
                        c.nt = 2;
                        c.nr = nr;
                        c.modulation = mod;
                        c.coding = coding;
                        FrameSimulator sim(c);
                        ErrorStats s;
                        for (int f = 0; f < kNoiselessFrames; ++f)
                            s.merge(sim.run_frame(kNoiseless, static_cast<std::uint64_t>(f)));
                        ++combos;
                        if (s.bit_errors != 0 || s.bits == 0) {
                            ++failures;
                            if (first.empty()) first = " first failure: " + render_config(c);
                        }
                    }
                }
            }
        }
    }
    return {failures == 0, fmt("%d combinations x %d frames, %d with errors", combos, kNoiselessFrames, failures) +
                               first};
}

// 4. Channel statistics of the geometric BRAN E model.
Outcome channel_statistics() {
    const auto profile = load_profile(std::filesystem::path(MCCDMA_DATA_DIR) / "bran_e.profile");
    const SimConfig cfg;
    const SpatialConfig s = cfg.spatial();
    const double bs = estimate_spatial_correlation(profile, s, 0.5, ArraySide::kBs, kChannelRealizations);
    const double ms = estimate_spatial_correlation(profile, s, 0.5, ArraySide::kMs, kChannelRealizations);
    const double bs10 = estimate_spatial_correlation(profile, s, 10.0, ArraySide::kBs, kChannelRealizations);
    const double ms10 = estimate_spatial_correlation(profile, s, 10.0, ArraySide::kMs, kChannelRealizations);
    const double rms = profile.rms_delay_spread_s();
    const auto corr = estimate_frequency_correlation(profile, s, subcarrier_frequencies(cfg.ofdm), 80,
                                                     kChannelRealizations);
    const double bc = coherence_bandwidth_hz(corr, cfg.ofdm.subcarrier_spacing_hz());
    const double fd = s.max_doppler_hz();
    const bool pass = std::abs(bs - kBsCorrTarget) <= kCorrTol && std::abs(ms - kMsCorrTarget) <= kCorrTol &&
                      bs10 < kFarCorrLimit && ms10 < kFarCorrLimit && rms >= kRmsLo && rms <= kRmsHi &&
                      std::abs(bc - kCoherenceTarget) <= kCoherenceTol && std::abs(fd - kDopplerTarget) <= kDopplerTol;
    return {pass, fmt("corr 0.5l BS %.3f MS %.3f, 10l BS %.3f MS %.3f; rms %.3f us; Bc %.3f MHz; fD %.2f Hz", bs, ms,
                      bs10, ms10, rms * 1e6, bc / 1e6, fd)};
}

// 5. Diversity and detector ordering at one Eb/N0 on the default system.
Outcome ordering(int workers) {
    struct Row {
        int nt, nr;
        double zf = 0, mmse = 0;
        std::uint64_t zf_err = 0, mmse_err = 0;
    };
    std::vector<Row> rows{{1, 1}, {2, 1}, {2, 2}};
    for (auto& r : rows) {
        for (auto det : {Detector::kZf, Detector::kMmse}) {
            SimConfig c;
            c.nt = r.nt;
            c.nr = r.nr;
            c.detector = det;
            c.target_bit_errors = kOrderingErrors;
            c.max_frames = 100000;
            const auto p = simulate_point(c, kOrderingEbN0, workers);
            (det == Detector::kZf ? r.zf : r.mmse) = p.stats.ber();
            (det == Detector::kZf ? r.zf_err : r.mmse_err) = p.stats.bit_errors;
        }
    }
    bool pass = true;
    std::string detail = fmt("%g dB ", kOrderingEbN0);
    for (const auto& r : rows) {
        pass &= r.zf_err >= static_cast<std::uint64_t>(kOrderingErrors) &&
                r.mmse_err >= static_cast<std::uint64_t>(kOrderingErrors) && r.mmse <= r.zf;
        detail += fmt("%dx%d MMSE %.3e ZF %.3e; ", r.nt, r.nr, r.mmse, r.zf);
    }
    pass &= rows[2].mmse < rows[1].mmse && rows[1].mmse < rows[0].mmse;
    const double gap_siso = std::log10(rows[0].zf / rows[0].mmse);
    const double gap_mimo = std::log10(rows[2].zf / rows[2].mmse);
    pass &= gap_mimo < gap_siso;
    detail += fmt("ZF/MMSE log10 gap SISO %.3f, 2x2 %.3f", gap_siso, gap_mimo);
    return {pass, detail};
}

// 6. ZF removes multiple-access interference: one user and full load agree.
Outcome zf_load_invariance() {
    oracle::Interval ci[2];
    double ber[2];
    int i = 0;
    for (int users : {1, 32}) {
        SimConfig c;
        c.nt = 2;
        c.nr = 1;
        c.detector = Detector::kZf;
        c.users = users;
        FrameSimulator sim(c);
        std::vector<double> per_frame;
        ErrorStats total;
        for (int f = 0; f < kLoadFrames; ++f) {
            const auto s = sim.run_frame(kLoadEbN0, static_cast<std::uint64_t>(f));
            per_frame.push_back(s.ber());
            total.merge(s);
        }
        ci[i] = oracle::mean_interval(per_frame);
        ber[i++] = total.ber();
    }
    return {ci[0].overlaps(ci[1]), fmt("2x1 ZF %g dB: Nu=1 %.4e [%.4e, %.4e], Nu=32 %.4e [%.4e, %.4e]", kLoadEbN0,
                                       ber[0], ci[0].lo(), ci[0].hi(), ber[1], ci[1].lo(), ci[1].hi())};
}

// Binary-input AWGN LLRs at the given Eb/N0 for code rate r.
std::vector<double> biawgn_llrs(const Bits& cw, double ebn0_db, double rate, std::mt19937_64& rng) {
    const double esn0 = rate * std::pow(10.0, ebn0_db / 10.0);
    std::normal_distribution<double> g(0.0, std::sqrt(1.0 / (2.0 * esn0)));
    std::vector<double> l(cw.size());
    for (std::size_t i = 0; i < cw.size(); ++i) l[i] = 4.0 * esn0 * ((cw[i] ? -1.0 : 1.0) + g(rng));
    return l;
}

Bits random_bits(std::mt19937_64& rng, int n) {
    Bits b(static_cast<std::size_t>(n));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1);
    return b;
}

// 7. Turbo code: exactness, near-ML decoding and coding gain.
Outcome turbo_chain() {
    std::mt19937_64 rng(7007);
    const SimConfig sys;
    const int k = FrameSimulator([] {
                      SimConfig c;
                      c.coding = Coding::kTurboR12;
                      return c;
                  }())
                      .info_bits_per_user();
    const auto cfg = make_turbo_config(k, sys.interleaver_seed, sys.turbo_iterations);
    TurboDecoder dec(cfg);

    int clean_failures = 0;
    for (int b = 0; b < kTurboNoiselessBlocks; ++b) {
        const Bits u = random_bits(rng, k);
        const Bits cw = turbo_encode(u, cfg);
        std::vector<double> l(cw.size());
        for (std::size_t i = 0; i < cw.size(); ++i) l[i] = cw[i] ? -20.0 : 20.0;
        clean_failures += dec.decode(l).bits != u;
    }

    // Brute-force ML over all 256 messages of a K = 8 code at Es/N0 = 0 dB.
    const auto small = make_turbo_config(8, 9, 8);
    TurboDecoder small_dec(small);
    std::vector<Bits> info(256), words(256);
    for (int m = 0; m < 256; ++m) {
        info[m].resize(8);
        for (int i = 0; i < 8; ++i) info[m][i] = static_cast<std::uint8_t>((m >> i) & 1);
        words[m] = turbo_encode(info[m], small);
    }
    const int trials = 2000;
    int agree = 0;
    for (int t = 0; t < trials; ++t) {
        const int sent = static_cast<int>(rng() & 255);
        const auto llr = biawgn_llrs(words[sent], 3.0103, 0.5, rng);
        double best = -std::numeric_limits<double>::infinity();
        int ml = 0;
        for (int m = 0; m < 256; ++m) {
            double metric = 0.0;
            for (std::size_t i = 0; i < llr.size(); ++i) metric += words[m][i] ? -llr[i] : llr[i];
            if (metric > best) {
                best = metric;
                ml = m;
            }
        }
        agree += small_dec.decode(llr).bits == info[ml];
    }
    const double agreement = static_cast<double>(agree) / trials;

    // Coded Eb/N0 for BER 1e-4: first grid point at or below the target,
    // with at least 2e6 information bits; uncoded reference from Q().
    double uncoded_db = 0.0;
    while (oracle::qpsk_awgn_ber(uncoded_db) > kCodingTargetBer) uncoded_db += 0.001;
    double coded_db = std::numeric_limits<double>::quiet_NaN();
    double coded_ber = 1.0;
    const std::uint64_t max_bits = 2'000'000;
    for (double ebn0 = 0.0; ebn0 <= uncoded_db - kCodingGainDb + 1e-9; ebn0 += 0.25) {
        std::uint64_t bits = 0, errors = 0;
        while (bits < max_bits && !(errors >= 200 && errors > 2 * kCodingTargetBer * static_cast<double>(bits))) {
            const Bits u = random_bits(rng, k);
            const auto res = dec.decode(biawgn_llrs(turbo_encode(u, cfg), ebn0, 0.5, rng));
            for (int i = 0; i < k; ++i) errors += res.bits[i] != u[i];
            bits += static_cast<std::uint64_t>(k);
        }
        coded_ber = static_cast<double>(errors) / static_cast<double>(bits);
        if (bits >= max_bits && coded_ber <= kCodingTargetBer) {
            coded_db = ebn0;
            break;
        }
    }
    const double gain = uncoded_db - coded_db;
    const bool pass = clean_failures == 0 && agreement >= kMlAgreement && std::isfinite(gain) && gain >= kCodingGainDb;
    return {pass, fmt("K=%d noiseless failures %d/%d; K=8 ML agreement %.4f; BER 1e-4 at %.2f dB coded (%.2e) vs "
                      "%.2f dB uncoded, gain %.2f dB",
                      k, clean_failures, kTurboNoiselessBlocks, agreement, coded_db, coded_ber, uncoded_db, gain)};
}

// 8. Same CSV bytes for any worker count.
Outcome determinism() {
    SimConfig c;
    c.ebn0_list = {2, 6, 10};
    c.target_bit_errors = 2000;
    c.max_frames = 40;
    std::vector<std::string> out;
    for (int workers : {1, 4, 8}) {
        SweepOptions opt;
        opt.workers = workers;
        out.push_back(report_csv(c, sweep(c, opt)));
    }
    const bool pass = out[0] == out[1] && out[0] == out[2];
    return {pass, fmt("%zu-byte CSV, workers 1/4/8 %s", out[0].size(), pass ? "identical" : "differ")};
}

// 9. Throughput of the outdoor system.
Outcome throughput() {
    const SimConfig c;
    const double r = derived_rates(c).reference_qpsk_full_load_bps;
    const bool printed = format_info(c).find(fmt("%.3f Mbit/s", r / 1e6)) != std::string::npos;
    return {printed && r >= kThroughputLo && r <= kThroughputHi, fmt("%.3f Mbit/s", r / 1e6)};
}

}  // namespace

int main(int argc, char** argv) {
    // Optional argument: run only the listed criterion numbers.
    std::vector<bool> selected(10, argc <= 1);
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n >= 1 && n <= 9) selected[n] = true;
    }
    const int workers = 8;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AWGN anchor", awgn_anchor},
        {"Alamouti diversity anchor", diversity_anchor},
        {"noiseless identity", noiseless_matrix},
        {"channel statistics", channel_statistics},
        {"diversity and detector ordering", [workers] { return ordering(workers); }},
        {"ZF load invariance", zf_load_invariance},
        {"turbo chain", turbo_chain},
        {"determinism", determinism},
        {"throughput arithmetic", throughput},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i + 1]) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::printf("criterion %zu %-32s %s  %s  [%.1f s]\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
