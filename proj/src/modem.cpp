#include "mccdma/modem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mccdma {

Modulation parse_modulation(std::string_view name) {
    if (name == "qpsk") return Modulation::kQpsk;
    if (name == "16qam") return Modulation::kQam16;
    throw InvalidParameter("unknown modulation '" + std::string(name) + "' (expected qpsk or 16qam)");
}

std::string_view to_string(Modulation m) { return m == Modulation::kQpsk ? "qpsk" : "16qam"; }

namespace {

const double kQpskLevel = 1.0 / std::sqrt(2.0);
const double kQamUnit = 1.0 / std::sqrt(10.0);

// Per-axis amplitude for (sign bit, magnitude bit).
double qam_level(int sign_bit, int magnitude_bit) {
    return (sign_bit ? -1.0 : 1.0) * (magnitude_bit ? 3.0 : 1.0) * kQamUnit;
}

// Max-log LLRs of one 4-PAM axis with Gray levels {+1,+3,-1,-3}*u for
// (sign, magnitude) = (0,0),(0,1),(1,0),(1,1). Distances are unnormalized.
void pam4_llr(double y, double inv_var, double& sign_llr, double& magnitude_llr) {
    const double u = kQamUnit;
    const double d00 = (y - u) * (y - u);
    const double d01 = (y - 3 * u) * (y - 3 * u);
    const double d10 = (y + u) * (y + u);
    const double d11 = (y + 3 * u) * (y + 3 * u);
    sign_llr = (std::min(d10, d11) - std::min(d00, d01)) * inv_var;
    magnitude_llr = (std::min(d01, d11) - std::min(d00, d10)) * inv_var;
}

int nearest_pam4(double y, int& magnitude_bit) {
    const double u = kQamUnit;
    magnitude_bit = std::abs(y) > 2 * u ? 1 : 0;
    return y < 0 ? 1 : 0;
}

}  // namespace

Constellation::Constellation(Modulation modulation) : modulation_(modulation) {
    if (modulation == Modulation::kQpsk) {
        bits_per_symbol_ = 2;
        points_.resize(4);
        for (int label = 0; label < 4; ++label)
            points_[label] = {(label & 1) ? -kQpskLevel : kQpskLevel, (label & 2) ? -kQpskLevel : kQpskLevel};
    } else {
        bits_per_symbol_ = 4;
        points_.resize(16);
        for (int label = 0; label < 16; ++label) {
            const int b0 = label & 1, b1 = (label >> 1) & 1, b2 = (label >> 2) & 1, b3 = (label >> 3) & 1;
            points_[label] = {qam_level(b0, b2), qam_level(b1, b3)};
        }
    }
}

CVec map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation) {
    const int m = constellation.bits_per_symbol();
    require(bits.size() % static_cast<std::size_t>(m) == 0,
            "map_bits: bit count " + std::to_string(bits.size()) + " not divisible by " + std::to_string(m));
    CVec symbols(bits.size() / m);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        int label = 0;
        for (int i = 0; i < m; ++i) label |= (bits[s * m + i] & 1) << i;
        symbols[s] = constellation.point(label);
    }
    return symbols;
}

Bits demap_hard(std::span<const cplx> estimates, double rho, const Constellation& constellation) {
    require(rho > 0.0, "demap_hard: rho must be positive");
    const int m = constellation.bits_per_symbol();
    Bits bits(estimates.size() * m);
    for (std::size_t s = 0; s < estimates.size(); ++s) {
        const cplx y = rho * estimates[s];
        std::uint8_t* out = &bits[s * m];
        if (m == 2) {
            out[0] = y.real() < 0 ? 1 : 0;
            out[1] = y.imag() < 0 ? 1 : 0;
        } else {
            int mag_i = 0, mag_q = 0;
            out[0] = static_cast<std::uint8_t>(nearest_pam4(y.real(), mag_i));
            out[1] = static_cast<std::uint8_t>(nearest_pam4(y.imag(), mag_q));
            out[2] = static_cast<std::uint8_t>(mag_i);
            out[3] = static_cast<std::uint8_t>(mag_q);
        }
    }
    return bits;
}

void demap_soft(std::span<const cplx> estimates, std::span<const double> rho, std::span<const double> noise_variance,
                const Constellation& constellation, std::vector<double>& llrs) {
    require(rho.size() == estimates.size() && noise_variance.size() == estimates.size(),
            "demap_soft: per-symbol parameter lengths differ");
    const int m = constellation.bits_per_symbol();
    llrs.reserve(llrs.size() + estimates.size() * m);
    for (std::size_t s = 0; s < estimates.size(); ++s) {
        require(noise_variance[s] > 0.0, "demap_soft: noise variance must be positive");
        require(rho[s] > 0.0, "demap_soft: rho must be positive");
        const cplx y = rho[s] * estimates[s];
        const double inv_var = 1.0 / noise_variance[s];
        if (m == 2) {
            // |y - a|^2 - |y + a|^2 = -4 a y per axis.
            llrs.push_back(4.0 * kQpskLevel * y.real() * inv_var);
            llrs.push_back(4.0 * kQpskLevel * y.imag() * inv_var);
        } else {
            double si = 0, mi = 0, sq = 0, mq = 0;
            pam4_llr(y.real(), inv_var, si, mi);
            pam4_llr(y.imag(), inv_var, sq, mq);
            llrs.push_back(si);
            llrs.push_back(sq);
            llrs.push_back(mi);
            llrs.push_back(mq);
        }
    }
}

std::vector<double> demap_soft(std::span<const cplx> estimates, double rho, double noise_variance,
                               const Constellation& constellation) {
    require(noise_variance > 0.0, "demap_soft: noise variance must be positive");
    const std::vector<double> rhos(estimates.size(), rho);
    const std::vector<double> vars(estimates.size(), noise_variance);
    std::vector<double> llrs;
    demap_soft(estimates, rhos, vars, constellation, llrs);
    return llrs;
}

}  // namespace mccdma
