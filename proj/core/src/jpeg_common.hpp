#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rdic/jpeg.hpp"

// Internal codec machinery shared by the encoder and decoder.
namespace rdic::jpegdetail {

// Marker bytes (the value after 0xFF).
inline constexpr std::uint8_t kSOI = 0xD8;
inline constexpr std::uint8_t kEOI = 0xD9;
inline constexpr std::uint8_t kSOF0 = 0xC0;
inline constexpr std::uint8_t kDHT = 0xC4;
inline constexpr std::uint8_t kDQT = 0xDB;
inline constexpr std::uint8_t kDRI = 0xDD;
inline constexpr std::uint8_t kSOS = 0xDA;
inline constexpr std::uint8_t kAPP0 = 0xE0;
inline constexpr std::uint8_t kCOM = 0xFE;

// Code-length counts (lengths 1..16) plus symbol values, the DHT payload.
struct HuffmanSpec {
    std::array<std::uint8_t, 16> bits;
    std::vector<std::uint8_t> values;
};

const HuffmanSpec& dc_luma_huffman();
const HuffmanSpec& ac_luma_huffman();
const HuffmanSpec& dc_chroma_huffman();
const HuffmanSpec& ac_chroma_huffman();

// Base quantization tables in natural (row-major) order.
const std::array<int, 64>& base_luma_table();
const std::array<int, 64>& base_chroma_table();

// Symbol -> (code, length) built from a HuffmanSpec.
struct HuffmanEncoder {
    std::array<std::uint16_t, 256> code{};
    std::array<std::uint8_t, 256> length{};

    explicit HuffmanEncoder(const HuffmanSpec& spec);
};

// Number of magnitude bits needed for a coefficient value.
int bit_category(int value);

} // namespace rdic::jpegdetail
