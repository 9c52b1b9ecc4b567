#include "jpeg_common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rdic/error.hpp"

namespace rdic {

const std::array<int, 64>& zigzag_order() {
    static const std::array<int, 64> order = {
        0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
        12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
    };
    return order;
}

namespace {

// natural index -> zigzag position
const std::array<int, 64>& zigzag_inverse() {
    static const std::array<int, 64> inv = [] {
        std::array<int, 64> v{};
        for (int z = 0; z < 64; ++z)
            v[zigzag_order()[z]] = z;
        return v;
    }();
    return inv;
}

} // namespace

int QuantTable::divisor_natural(int i) const {
    return zigzag[zigzag_inverse()[i]];
}

QuantTablePair quality_to_tables(int quality) {
    if (quality < 1 || quality > 100)
        throw Error("quality must be in [1,100], got " + std::to_string(quality));
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;

    QuantTablePair pair;
    for (int z = 0; z < 64; ++z) {
        const int n = zigzag_order()[z];
        const int luma = (jpegdetail::base_luma_table()[n] * scale + 50) / 100;
        const int chroma = (jpegdetail::base_chroma_table()[n] * scale + 50) / 100;
        pair.luma.zigzag[z] = std::clamp(luma, 1, 255);
        pair.chroma.zigzag[z] = std::clamp(chroma, 1, 255);
    }
    return pair;
}

namespace {

// Separable 8x8 DCT-II basis: basis[u][x] = 0.5 * C(u) * cos((2x+1) u pi / 16).
const std::array<std::array<double, 8>, 8>& dct_basis() {
    static const std::array<std::array<double, 8>, 8> basis = [] {
        std::array<std::array<double, 8>, 8> b{};
        for (int u = 0; u < 8; ++u)
            for (int x = 0; x < 8; ++x) {
                double v = std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
                if (u == 0)
                    v /= std::sqrt(2.0);
                b[u][x] = 0.5 * v;
            }
        return b;
    }();
    return basis;
}

} // namespace

std::array<double, 64> fdct_block(const std::array<double, 64>& samples) {
    const auto& basis = dct_basis();
    std::array<double, 64> rows{};
    for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x)
                acc += samples[8 * y + x] * basis[u][x];
            rows[8 * y + u] = acc;
        }
    std::array<double, 64> out{};
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y)
                acc += rows[8 * y + u] * basis[v][y];
            out[8 * v + u] = acc;
        }
    return out;
}

std::array<double, 64> idct_block(const std::array<double, 64>& coefs) {
    const auto& basis = dct_basis();
    std::array<double, 64> rows{};
    for (int v = 0; v < 8; ++v)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u)
                acc += coefs[8 * v + u] * basis[u][x];
            rows[8 * v + x] = acc;
        }
    std::array<double, 64> out{};
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v)
                acc += rows[8 * v + x] * basis[v][y];
            out[8 * y + x] = acc;
        }
    return out;
}

CoefficientBlock quantize_block(const std::array<double, 64>& coefs,
                                const QuantTable& table, int component) {
    CoefficientBlock block;
    block.component = component;
    for (int i = 0; i < 64; ++i) {
        // round half away from zero
        const double q = coefs[i] / table.divisor_natural(i);
        block.values[i] = static_cast<std::int16_t>(std::lround(q));
    }
    return block;
}

} // namespace rdic

namespace rdic::jpegdetail {

const std::array<int, 64>& base_luma_table() {
    static const std::array<int, 64> t = {
        16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
        14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
        18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
        49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
    };
    return t;
}

const std::array<int, 64>& base_chroma_table() {
    static const std::array<int, 64> t = {
        17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
        24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    };
    return t;
}

const HuffmanSpec& dc_luma_huffman() {
    static const HuffmanSpec spec = {
        {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
    };
    return spec;
}

const HuffmanSpec& dc_chroma_huffman() {
    static const HuffmanSpec spec = {
        {0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
    };
    return spec;
}

const HuffmanSpec& ac_luma_huffman() {
    static const HuffmanSpec spec = {
        {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
        {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
         0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08,
         0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72,
         0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28,
         0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
         0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
         0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
         0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
         0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3,
         0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
         0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9,
         0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
         0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4,
         0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa},
    };
    return spec;
}

const HuffmanSpec& ac_chroma_huffman() {
    static const HuffmanSpec spec = {
        {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
        {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
         0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
         0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1,
         0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26,
         0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44,
         0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
         0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
         0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
         0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a,
         0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
         0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7,
         0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda,
         0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4,
         0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa},
    };
    return spec;
}

HuffmanEncoder::HuffmanEncoder(const HuffmanSpec& spec) {
    // Canonical code assignment: codes of each length are consecutive,
    // starting from twice the previous length's end.
    std::uint16_t next = 0;
    std::size_t vi = 0;
    for (int len = 1; len <= 16; ++len) {
        for (int i = 0; i < spec.bits[len - 1]; ++i) {
            const std::uint8_t symbol = spec.values[vi++];
            code[symbol] = next++;
            length[symbol] = static_cast<std::uint8_t>(len);
        }
        next = static_cast<std::uint16_t>(next << 1);
    }
}

int bit_category(int value) {
    int v = value < 0 ? -value : value;
    int bits = 0;
    while (v) {
        ++bits;
        v >>= 1;
    }
    return bits;
}

} // namespace rdic::jpegdetail
