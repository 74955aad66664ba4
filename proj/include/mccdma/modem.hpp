#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mccdma/types.hpp"

namespace mccdma {

enum class Modulation { kQpsk, kQam16 };

Modulation parse_modulation(std::string_view name);
std::string_view to_string(Modulation m);

/// Gray-labeled square constellation with unit average energy.
///
/// Bits of a symbol are (b0, b1, ...). b0 selects the in-phase sign and b1 the
/// quadrature sign (0 -> positive). For 16QAM, b2/b3 select the in-phase /
/// quadrature magnitude (0 -> inner level 1, 1 -> outer level 3), scaled by
/// 1/sqrt(10).
///
/// LLRs are log P(b=0)/P(b=1): positive favours bit 0.
class Constellation {
public:
    explicit Constellation(Modulation modulation);

    Modulation modulation() const { return modulation_; }
    int order() const { return static_cast<int>(points_.size()); }
    int bits_per_symbol() const { return bits_per_symbol_; }
    /// Point for label `label`, where bit i of the symbol is bit i of `label`.
    cplx point(int label) const { return points_[label]; }
    std::span<const cplx> points() const { return points_; }

private:
    Modulation modulation_;
    int bits_per_symbol_;
    CVec points_;
};

CVec map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation);

/// Nearest-point decisions on rho * estimate.
Bits demap_hard(std::span<const cplx> estimates, double rho, const Constellation& constellation);

/// Max-log LLRs of rho * estimate; `noise_variance` is the complex noise
/// variance of the rho-scaled estimate.
std::vector<double> demap_soft(std::span<const cplx> estimates, double rho, double noise_variance,
                               const Constellation& constellation);

/// Per-symbol variant: estimates[i] is scaled by rho[i] and has variance
/// noise_variance[i]. Appends to `llrs`.
void demap_soft(std::span<const cplx> estimates, std::span<const double> rho,
                std::span<const double> noise_variance, const Constellation& constellation,
                std::vector<double>& llrs);

}  // namespace mccdma
