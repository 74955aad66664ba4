#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mccdma/ofdm.hpp"
#include "oracles.hpp"

using namespace mccdma;

namespace {

OfdmParams small(int nfft, int nc, int guard) {
    OfdmParams p;
    p.fft_size = nfft;
    p.used_carriers = nc;
    p.guard_samples = guard;
    return p;
}

double energy(std::span<const cplx> v) {
    double e = 0.0;
    for (cplx x : v) e += std::norm(x);
    return e;
}

// Sends two random symbols through a linear convolution with `taps` and
// returns the worst deviation of the demodulated second symbol from
// H(f_k) X_k, with H the DFT of the taps evaluated directly.
double convolution_error(const OfdmParams& p, const CVec& taps, std::mt19937_64& rng) {
    OfdmModem modem(p);
    const auto x1 = oracle::random_complex(rng, p.used_carriers);
    const auto x2 = oracle::random_complex(rng, p.used_carriers);
    CVec tx = modem.modulate(x1);
    const CVec s2 = modem.modulate(x2);
    tx.insert(tx.end(), s2.begin(), s2.end());

    CVec rx(tx.size());
    for (std::size_t n = 0; n < tx.size(); ++n)
        for (std::size_t l = 0; l < taps.size() && l <= n; ++l) rx[n] += taps[l] * tx[n - l];

    const std::size_t ns = p.samples_per_symbol();
    const CVec y2 = modem.demodulate(std::span<const cplx>(rx).subspan(ns, ns));
    const auto bins = allocate_subcarriers(p);
    double worst = 0.0;
    for (int k = 0; k < p.used_carriers; ++k) {
        cplx h{};
        for (std::size_t l = 0; l < taps.size(); ++l)
            h += taps[l] * std::polar(1.0, -2.0 * kPi * bins[k] * static_cast<double>(l) / p.fft_size);
        worst = std::max(worst, std::abs(y2[k] - h * x2[k]));
    }
    return worst;
}

}  // namespace

TEST_CASE("default parameters") {
    const OfdmParams p;
    CHECK(p.subcarrier_spacing_hz() == doctest::Approx(56.25e3));
    CHECK(p.subcarrier_spacing_hz() * p.fft_size == doctest::Approx(p.sampling_freq_hz));
    CHECK(p.guard_duration_s() == doctest::Approx(3.75e-6));
    CHECK(p.useful_duration_s() == doctest::Approx(17.7778e-6).epsilon(1e-5));
    CHECK(p.symbol_duration_s() == doctest::Approx(21.5278e-6).epsilon(1e-5));
    CHECK(p.occupied_bandwidth_hz() == doctest::Approx(41.4e6));
}

TEST_CASE("subcarrier allocation") {
    const auto bins = allocate_subcarriers(OfdmParams{});
    REQUIRE(bins.size() == 736);
    CHECK(bins.front() == -368);
    CHECK(bins[367] == -1);
    CHECK(bins[368] == 1);
    CHECK(bins.back() == 368);
    CHECK(allocate_subcarriers(small(8, 4, 2)) == std::vector<int>{-2, -1, 1, 2});
    CHECK_THROWS_AS(allocate_subcarriers(small(4, 8, 1)), InvalidParameter);
    CHECK_THROWS_AS(allocate_subcarriers(small(8, 3, 1)), InvalidParameter);
    CHECK_THROWS_AS(allocate_subcarriers(small(8, 4, -1)), InvalidParameter);
    const auto f = subcarrier_frequencies(small(8, 4, 2));
    CHECK(f[0] == doctest::Approx(-2 * 57.6e6 / 8));
    CHECK(f[3] == doctest::Approx(2 * 57.6e6 / 8));
}

TEST_CASE("single subcarrier is a constant-modulus complex exponential") {
    const OfdmParams p = small(64, 32, 16);
    OfdmModem modem(p);
    const auto bins = allocate_subcarriers(p);
    for (int k : {0, 5, 20, 31}) {
        CVec col(32);
        col[k] = 1.0;
        const CVec s = modem.modulate(col);
        REQUIRE(s.size() == 80);
        const cplx step = std::polar(1.0, 2.0 * kPi * bins[k] / 64.0);
        for (std::size_t n = 0; n < s.size(); ++n) {
            CHECK(std::abs(s[n]) == doctest::Approx(1.0 / 8.0));
            if (n + 1 < s.size()) CHECK(std::abs(s[n + 1] - s[n] * step) < 1e-12);
        }
    }
}

TEST_CASE("zero column, cyclic prefix, Parseval and round trip") {
    std::mt19937_64 rng(51);
    for (auto [nfft, nc, guard] : {std::tuple{8, 6, 2}, std::tuple{64, 48, 16}, std::tuple{1024, 736, 216}}) {
        OfdmModem modem(small(nfft, nc, guard));
        const CVec zero = modem.modulate(CVec(nc));
        CHECK(energy(zero) == 0.0);
        for (int trial = 0; trial < 20; ++trial) {
            const auto x = oracle::random_complex(rng, nc);
            const CVec s = modem.modulate(x);
            REQUIRE(s.size() == static_cast<std::size_t>(nfft + guard));
            for (int g = 0; g < guard; ++g) CHECK(s[g] == s[g + nfft]);
            const double ratio = energy(std::span<const cplx>(s).subspan(guard)) / energy(x);
            CHECK(std::abs(ratio - 1.0) < 1e-12);
            const CVec back = modem.demodulate(s);
            double worst = 0.0;
            for (int k = 0; k < nc; ++k) worst = std::max(worst, std::abs(back[k] - x[k]));
            CHECK(worst < 1e-12);
        }
    }
}

TEST_CASE("free functions and length errors") {
    std::mt19937_64 rng(52);
    const OfdmParams p = small(16, 8, 4);
    const auto x = oracle::random_complex(rng, 8);
    const CVec back = demodulate(modulate(x, p), p);
    for (int k = 0; k < 8; ++k) CHECK(std::abs(back[k] - x[k]) < 1e-12);
    OfdmModem modem(p);
    CHECK_THROWS_AS(modem.modulate(CVec(7)), InvalidParameter);
    CHECK_THROWS_AS(modem.demodulate(CVec(19)), InvalidParameter);
    CVec out(5);
    CHECK_THROWS_AS(modem.demodulate(CVec(20), out), InvalidParameter);
}

TEST_CASE("cyclic prefix turns a short linear channel into per-subcarrier gains") {
    std::mt19937_64 rng(53);
    const OfdmParams p = small(64, 48, 16);
    for (int len : {1, 5, 16}) {
        const CVec taps = oracle::random_complex(rng, len);
        CHECK(convolution_error(p, taps, rng) < 1e-10);
    }
    // Default system, impulse response spanning the whole guard.
    const OfdmParams def;
    CVec taps = oracle::random_complex(rng, 217, 0.1);
    CHECK(convolution_error(def, taps, rng) < 1e-10);
}

TEST_CASE("negative control: a response longer than the guard leaks") {
    std::mt19937_64 rng(54);
    const OfdmParams p = small(64, 48, 16);
    CVec taps(28);
    taps[0] = 1.0;
    taps[27] = 0.5;
    CHECK(convolution_error(p, taps, rng) > 1e-2);
}
