#include "mccdma/spreading.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace mccdma {

SpreadingMatrix::SpreadingMatrix(int length, int num_users) : length_(length), num_users_(num_users) {
    require(length >= 2 && length <= 1024 && std::has_single_bit(static_cast<unsigned>(length)),
            "spreading length must be a power of two in [2, 1024], got " + std::to_string(length));
    require(num_users >= 1 && num_users <= length,
            "number of users must be in [1, " + std::to_string(length) + "], got " + std::to_string(num_users));
    const double scale = 1.0 / std::sqrt(static_cast<double>(length));
    entries_.resize(static_cast<std::size_t>(length) * num_users);
    for (int j = 0; j < num_users; ++j) {
        for (int k = 0; k < length; ++k) {
            const bool negative = std::popcount(static_cast<unsigned>(k & j)) & 1U;
            entries_[static_cast<std::size_t>(j) * length + k] = negative ? -scale : scale;
        }
    }
}

std::span<const double> SpreadingMatrix::column(int user) const {
    require(user >= 0 && user < num_users_, "user index out of range");
    return std::span<const double>(entries_).subspan(static_cast<std::size_t>(user) * length_, length_);
}

SpreadingMatrix generate_walsh_hadamard(int length, int num_users) { return SpreadingMatrix(length, num_users); }

void fast_walsh_hadamard(std::span<cplx> data) {
    const std::size_t n = data.size();
    require(std::has_single_bit(n), "transform length must be a power of two");
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const cplx a = data[j];
                const cplx b = data[j + h];
                data[j] = a + b;
                data[j + h] = a - b;
            }
        }
    }
}

CVec spread(std::span<const cplx> symbols, const SpreadingMatrix& codes) {
    require(static_cast<int>(symbols.size()) == codes.num_users(),
            "spread: expected " + std::to_string(codes.num_users()) + " symbols, got " +
                std::to_string(symbols.size()));
    CVec chips(codes.length(), cplx{});
    std::copy(symbols.begin(), symbols.end(), chips.begin());
    fast_walsh_hadamard(chips);
    const double scale = 1.0 / std::sqrt(static_cast<double>(codes.length()));
    for (auto& c : chips) c *= scale;
    return chips;
}

cplx despread(std::span<const cplx> chips, std::span<const double> code) {
    require(chips.size() == code.size(), "despread: chip and code lengths differ");
    cplx acc{};
    for (std::size_t k = 0; k < chips.size(); ++k) acc += code[k] * chips[k];
    return acc;
}

CVec despread_all(std::span<const cplx> chips, const SpreadingMatrix& codes) {
    require(static_cast<int>(chips.size()) == codes.length(), "despread: wrong chip count");
    CVec work(chips.begin(), chips.end());
    fast_walsh_hadamard(work);
    const double scale = 1.0 / std::sqrt(static_cast<double>(codes.length()));
    CVec out(codes.num_users());
    for (int j = 0; j < codes.num_users(); ++j) out[j] = work[j] * scale;
    return out;
}

MappingScheme parse_mapping_scheme(std::string_view name) {
    if (name == "1Da") return MappingScheme::k1Da;
    if (name == "1Db") return MappingScheme::k1Db;
    if (name == "2Da") return MappingScheme::k2Da;
    if (name == "2Db") return MappingScheme::k2Db;
    throw InvalidParameter("unknown chip mapping '" + std::string(name) + "' (expected 1Da, 1Db, 2Da or 2Db)");
}

std::string_view to_string(MappingScheme scheme) {
    switch (scheme) {
        case MappingScheme::k1Da: return "1Da";
        case MappingScheme::k1Db: return "1Db";
        case MappingScheme::k2Da: return "2Da";
        case MappingScheme::k2Db: return "2Db";
    }
    return "?";
}

namespace {

bool is_two_dimensional(MappingScheme s) { return s == MappingScheme::k2Da || s == MappingScheme::k2Db; }
bool is_interleaved(MappingScheme s) { return s == MappingScheme::k1Db || s == MappingScheme::k2Db; }

}  // namespace

ChipMapping::ChipMapping(MappingScheme scheme, int code_length, int time_spread, int subcarriers, int symbols)
    : scheme_(scheme), time_spread_(time_spread), subcarriers_(subcarriers), symbols_(symbols) {
    require(code_length > 0 && subcarriers > 0 && symbols > 0, "chip mapping dimensions must be positive");
    if (is_two_dimensional(scheme)) {
        require(time_spread > 1, "2D chip mapping needs a time spreading length > 1");
        require(symbols % 2 == 0, "2D chip mapping needs an even number of OFDM symbols");
    } else {
        require(time_spread == 1, "1D chip mapping needs a time spreading length of 1");
    }
    require(code_length % time_spread == 0,
            "time spreading length " + std::to_string(time_spread) + " does not divide Lc " +
                std::to_string(code_length));
    freq_spread_ = code_length / time_spread;
    require(freq_spread_ <= subcarriers, "frequency spreading length exceeds the number of subcarriers");
    if (is_interleaved(scheme)) {
        require(subcarriers % freq_spread_ == 0,
                "interleaved chip mapping needs Nc (" + std::to_string(subcarriers) +
                    ") divisible by Sf (" + std::to_string(freq_spread_) + ")");
    }
    freq_slots_ = subcarriers / freq_spread_;
    int time_rows = symbols;
    if (is_two_dimensional(scheme)) time_rows = (symbols / 2 / time_spread) * 2;
    require(time_rows > 0, "frame too short for the requested time spreading");
    blocks_ = freq_slots_ * time_rows;

    table_.resize(static_cast<std::size_t>(blocks_) * code_length);
    for (int b = 0; b < blocks_; ++b)
        for (int c = 0; c < code_length; ++c) table_[static_cast<std::size_t>(b) * code_length + c] = compute_cell(b, c);
}

GridCell ChipMapping::compute_cell(int block, int chip) const {
    const int row = block / freq_slots_;
    const int slot = block % freq_slots_;
    if (!is_two_dimensional(scheme_)) {
        const int sc = scheme_ == MappingScheme::k1Da ? slot * freq_spread_ + chip : chip * freq_slots_ + slot;
        return {sc, row};
    }
    // row = 2 * group + half; chips snake along time inside the rectangle.
    const int group = row / 2;
    const int half = row % 2;
    const int f = chip / time_spread_;
    const int step = chip % time_spread_;
    const int t = (f % 2 == 0) ? step : time_spread_ - 1 - step;
    const int pair = group * time_spread_ + t;
    const int sc = scheme_ == MappingScheme::k2Da ? slot * freq_spread_ + f : f * freq_slots_ + slot;
    return {sc, 2 * pair + half};
}

double ResourceGrid::mean_energy(int antenna) const {
    double acc = 0.0;
    for (int n = 0; n < symbols_; ++n)
        for (const auto& c : column(antenna, n)) acc += std::norm(c);
    return acc / (static_cast<double>(subcarriers_) * symbols_);
}

ResourceGrid map_chips(std::span<const cplx> blocks, const ChipMapping& mapping) {
    const int lc = mapping.code_length();
    require(blocks.size() % static_cast<std::size_t>(lc) == 0, "map_chips: chip count is not a multiple of Lc");
    const int num_blocks = static_cast<int>(blocks.size() / lc);
    require(num_blocks <= mapping.blocks_per_frame(),
            "map_chips: " + std::to_string(num_blocks) + " blocks exceed frame capacity " +
                std::to_string(mapping.blocks_per_frame()));
    ResourceGrid grid(1, mapping.subcarriers(), mapping.symbols());
    for (int b = 0; b < num_blocks; ++b) {
        const auto cells = mapping.block_cells(b);
        for (int c = 0; c < lc; ++c) grid.at(0, cells[c].subcarrier, cells[c].symbol) = blocks[b * lc + c];
    }
    return grid;
}

CVec demap_chips(const ResourceGrid& grid, const ChipMapping& mapping, int num_blocks, int antenna) {
    require(grid.subcarriers() == mapping.subcarriers() && grid.symbols() == mapping.symbols(),
            "demap_chips: grid dimensions do not match the chip mapping");
    require(antenna >= 0 && antenna < grid.antennas(), "demap_chips: antenna out of range");
    require(num_blocks >= 0 && num_blocks <= mapping.blocks_per_frame(), "demap_chips: block count out of range");
    const int lc = mapping.code_length();
    CVec out(static_cast<std::size_t>(num_blocks) * lc);
    for (int b = 0; b < num_blocks; ++b) {
        const auto cells = mapping.block_cells(b);
        for (int c = 0; c < lc; ++c) out[b * lc + c] = grid.at(antenna, cells[c].subcarrier, cells[c].symbol);
    }
    return out;
}

}  // namespace mccdma
