#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Gray QPSK (or BPSK per bit) over AWGN.
inline double qpsk_awgn_ber(double ebn0_db) { return q_function(std::sqrt(2.0 * std::pow(10.0, ebn0_db / 10.0))); }

/// Composite Simpson rule with `n` (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// QPSK BER after maximum-ratio combining of two independent Rayleigh
/// branches that each carry half the transmit power: the per-bit SNR is
/// Gamma(2, theta) with theta = (Eb/N0)/2. Integrated numerically over the
/// SNR density.
inline double mrc2_half_power_ber(double ebn0_db) {
    const double theta = std::pow(10.0, ebn0_db / 10.0) / 2.0;
    auto integrand = [theta](double g) {
        return q_function(std::sqrt(2.0 * g)) * g / (theta * theta) * std::exp(-g / theta);
    };
    return simpson(integrand, 0.0, 60.0 * theta, 200000);
}

/// Textbook closed form for the same quantity (L = 2 branches).
inline double mrc2_half_power_ber_closed(double ebn0_db) {
    const double theta = std::pow(10.0, ebn0_db / 10.0) / 2.0;
    const double mu = std::sqrt(theta / (1.0 + theta));
    const double p = (1.0 - mu) / 2.0;
    return p * p * (2.0 + mu);
}

inline std::vector<cplx> random_complex(std::mt19937_64& rng, std::size_t n, double sigma = 1.0) {
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<cplx> v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

/// Sylvester-Hadamard matrix of order n built by the block recursion
/// H_2n = [[H, H], [H, -H]], unnormalized.
inline std::vector<std::vector<int>> sylvester(int n) {
    std::vector<std::vector<int>> h{{1}};
    while (static_cast<int>(h.size()) < n) {
        const std::size_t m = h.size();
        std::vector<std::vector<int>> next(2 * m, std::vector<int>(2 * m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        h = std::move(next);
    }
    return h;
}

/// Sample mean with a two-sided 95% normal confidence half-width.
struct Interval {
    double mean = 0.0;
    double half_width = 0.0;
    double lo() const { return mean - half_width; }
    double hi() const { return mean + half_width; }
    bool overlaps(const Interval& o) const { return lo() <= o.hi() && o.lo() <= hi(); }
};

inline Interval mean_interval(const std::vector<double>& samples) {
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= (n - 1.0);
    return {mean, 1.959963984540054 * std::sqrt(var / n)};
}

}  // namespace oracle
