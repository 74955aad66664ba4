#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mccdma/types.hpp"

namespace mccdma {

/// First `num_users` columns of the normalized Sylvester-Hadamard matrix of
/// order `length`. Entry (k, j) is (-1)^popcount(k & j) / sqrt(length).
class SpreadingMatrix {
public:
    SpreadingMatrix(int length, int num_users);

    int length() const { return length_; }
    int num_users() const { return num_users_; }
    double at(int chip, int user) const { return entries_[static_cast<std::size_t>(user) * length_ + chip]; }
    std::span<const double> column(int user) const;

private:
    int length_;
    int num_users_;
    std::vector<double> entries_;  // column-major
};

SpreadingMatrix generate_walsh_hadamard(int length, int num_users);

/// In-place unnormalized fast Walsh-Hadamard transform (natural order).
/// `data.size()` must be a power of two.
void fast_walsh_hadamard(std::span<cplx> data);

/// chips = C * symbols, computed with the fast transform.
CVec spread(std::span<const cplx> symbols, const SpreadingMatrix& codes);

/// c_j^T * chips.
cplx despread(std::span<const cplx> chips, std::span<const double> code);

/// C^T * chips for all users at once (fast transform).
CVec despread_all(std::span<const cplx> chips, const SpreadingMatrix& codes);

enum class MappingScheme { k1Da, k1Db, k2Da, k2Db };

MappingScheme parse_mapping_scheme(std::string_view name);
std::string_view to_string(MappingScheme scheme);

struct GridCell {
    int subcarrier = 0;
    int symbol = 0;
    bool operator==(const GridCell&) const = default;
};

/// Placement of spread-symbol chips on the (subcarrier, OFDM symbol) grid.
///
/// OFDM symbols are grouped into STBC pairs (2p, 2p+1). 1D schemes put all
/// chips of a block in one symbol. 2D schemes span `time_spread` consecutive
/// pairs, always in the same half of each pair, and fill the Sf x St
/// rectangle in snake order along time. Blocks are laid out row-major:
/// time rows outermost, frequency slots innermost.
class ChipMapping {
public:
    ChipMapping(MappingScheme scheme, int code_length, int time_spread, int subcarriers, int symbols);

    MappingScheme scheme() const { return scheme_; }
    int code_length() const { return freq_spread_ * time_spread_; }
    int freq_spread() const { return freq_spread_; }
    int time_spread() const { return time_spread_; }
    int subcarriers() const { return subcarriers_; }
    int symbols() const { return symbols_; }
    int blocks_per_frame() const { return blocks_; }

    GridCell cell(int block, int chip) const {
        return table_[static_cast<std::size_t>(block) * code_length() + chip];
    }
    std::span<const GridCell> block_cells(int block) const {
        return std::span<const GridCell>(table_).subspan(static_cast<std::size_t>(block) * code_length(),
                                                         code_length());
    }

private:
    GridCell compute_cell(int block, int chip) const;

    MappingScheme scheme_;
    int freq_spread_;
    int time_spread_;
    int subcarriers_;
    int symbols_;
    int blocks_ = 0;
    int freq_slots_ = 0;
    std::vector<GridCell> table_;
};

/// Complex cells per antenna, stored symbol-major so one OFDM symbol is
/// contiguous.
class ResourceGrid {
public:
    ResourceGrid() = default;
    ResourceGrid(int antennas, int subcarriers, int symbols)
        : antennas_(antennas), subcarriers_(subcarriers), symbols_(symbols),
          cells_(static_cast<std::size_t>(antennas) * subcarriers * symbols) {
        require(antennas > 0 && subcarriers > 0 && symbols > 0, "grid dimensions must be positive");
    }

    int antennas() const { return antennas_; }
    int subcarriers() const { return subcarriers_; }
    int symbols() const { return symbols_; }

    cplx& at(int antenna, int subcarrier, int symbol) { return cells_[index(antenna, subcarrier, symbol)]; }
    cplx at(int antenna, int subcarrier, int symbol) const { return cells_[index(antenna, subcarrier, symbol)]; }

    std::span<cplx> column(int antenna, int symbol) {
        return std::span<cplx>(cells_).subspan(index(antenna, 0, symbol), subcarriers_);
    }
    std::span<const cplx> column(int antenna, int symbol) const {
        return std::span<const cplx>(cells_).subspan(index(antenna, 0, symbol), subcarriers_);
    }
    std::span<const cplx> cells() const { return cells_; }
    std::span<cplx> cells() { return cells_; }

    /// Mean |cell|^2 over one antenna's cells.
    double mean_energy(int antenna) const;

private:
    std::size_t index(int antenna, int subcarrier, int symbol) const {
        return (static_cast<std::size_t>(antenna) * symbols_ + symbol) * subcarriers_ + subcarrier;
    }

    int antennas_ = 0;
    int subcarriers_ = 0;
    int symbols_ = 0;
    CVec cells_;
};

/// Places consecutive Lc-chip blocks (flattened) on a single-antenna grid.
ResourceGrid map_chips(std::span<const cplx> blocks, const ChipMapping& mapping);

/// Inverse of map_chips for the first `num_blocks` blocks of `antenna`.
CVec demap_chips(const ResourceGrid& grid, const ChipMapping& mapping, int num_blocks, int antenna = 0);

}  // namespace mccdma
