#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rdic/image.hpp"
#include "rdic/roimask.hpp"

namespace rdic {

// Quantization divisors in zigzag order, each in [1,255].
struct QuantTable {
    std::array<int, 64> zigzag{};

    // Divisor for the coefficient at natural (row-major) index i.
    int divisor_natural(int i) const;

    bool operator==(const QuantTable&) const = default;
};

struct QuantTablePair {
    QuantTable luma;
    QuantTable chroma;
};

// Quantized coefficients of one 8x8 block in natural order.
// component: 0 = Y (or gray), 1 = Cb, 2 = Cr.
struct CoefficientBlock {
    std::array<std::int16_t, 64> values{};
    int component = 0;
};

// A complete baseline JFIF byte stream.
using JpegStream = std::vector<std::uint8_t>;

// Zigzag index -> natural index map for 8x8 blocks.
const std::array<int, 64>& zigzag_order();

// Scales the standard base tables by the common quality convention:
// scale = q < 50 ? 5000/q : 200 - 2q, entry -> clamp((t*scale + 50)/100, 1, 255).
// q = 50 reproduces the base tables, q = 100 gives all ones.
QuantTablePair quality_to_tables(int quality);

// Forward DCT-II of one block. Input samples must already be level-shifted
// by -128; output is in natural order.
std::array<double, 64> fdct_block(const std::array<double, 64>& samples);

// Exact inverse of fdct_block; output stays in the level-shifted domain.
std::array<double, 64> idct_block(const std::array<double, 64>& coefs);

// Divides each coefficient by its table entry, rounding half away from zero.
CoefficientBlock quantize_block(const std::array<double, 64>& coefs,
                                const QuantTable& table, int component = 0);

// Baseline JFIF encoder: 4:4:4, fixed standard Huffman tables, no restart
// markers. Deterministic: identical inputs give byte-identical streams.
JpegStream encode(const Image& img, int quality);

// Decoder for baseline, non-subsampled streams without restart markers.
// Errors are distinct and report the byte offset where parsing failed.
Image decode(const JpegStream& stream);

// Single standard-decodable stream carrying the q_roi tables. RoI blocks are
// quantized directly with the q_roi tables; background blocks are quantized
// with the q_bg tables, reconstructed, and requantized with the q_roi tables,
// which strips high-frequency content so they entropy-code smaller.
JpegStream encode_region_adaptive(const Image& img, const BlockQualityMap& blocks,
                                  int q_roi, int q_bg);

} // namespace rdic
